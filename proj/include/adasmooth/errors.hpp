#pragma once

#include <stdexcept>
#include <string>

namespace adasmooth {

//! Root of all library errors.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! Malformed or insufficient input data (CLI exit code 3).
class DataError : public Error
{
public:
  using Error::Error;
};

//! An estimator or decomposition could not produce a usable number (CLI exit
//! code 4).
class NumericalError : public Error
{
public:
  using Error::Error;
};

#define ADASMOOTH_DEFINE_ERROR(Name, Base)                                     \
  class Name : public Base                                                     \
  {                                                                            \
  public:                                                                      \
    using Base::Base;                                                          \
  }

ADASMOOTH_DEFINE_ERROR(EmptySample, DataError);
ADASMOOTH_DEFINE_ERROR(DegenerateMu, DataError);
ADASMOOTH_DEFINE_ERROR(LagTooLarge, DataError);
ADASMOOTH_DEFINE_ERROR(EmptySn, DataError);
ADASMOOTH_DEFINE_ERROR(NonFiniteInput, DataError);
ADASMOOTH_DEFINE_ERROR(NegativeVariance, DataError);
ADASMOOTH_DEFINE_ERROR(CurveTooShort, DataError);
ADASMOOTH_DEFINE_ERROR(LengthMismatch, DataError);

ADASMOOTH_DEFINE_ERROR(NoEffectiveCurves, NumericalError);
ADASMOOTH_DEFINE_ERROR(MaxDerivativeExceeded, NumericalError);
ADASMOOTH_DEFINE_ERROR(ZeroHolderConstant, NumericalError);
ADASMOOTH_DEFINE_ERROR(CholeskyFailure, NumericalError);
ADASMOOTH_DEFINE_ERROR(ZeroDenominator, NumericalError);

#undef ADASMOOTH_DEFINE_ERROR

} // namespace adasmooth
