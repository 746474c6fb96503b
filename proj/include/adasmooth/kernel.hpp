#pragma once

#include <functional>
#include <string>

namespace adasmooth {

enum class KernelKind
{
  epanechnikov,
  custom
};

//! Smoothing kernel supported on [-1, 1], with the two constants needed by
//! the plug-in bandwidth: the squared L2 norm and the absolute moments
//! int |K(v)| |v|^s dv.
class Kernel
{
public:
  //! K(t) = 3/4 (1 - t^2) on [-1, 1].
  static Kernel epanechnikov();

  //! A user kernel. Values outside [-1, 1] are forced to zero; negative
  //! values are rejected at evaluation time.
  static Kernel custom(std::string name, std::function<double(double)> k,
                       double l2_norm_sq,
                       std::function<double(double)> abs_moment);

  double operator()(double t) const
  {
    if (t < -1.0 || t > 1.0) {
      return 0.0;
    }
    if (kind_ == KernelKind::epanechnikov) {
      return 0.75 * (1.0 - t * t);
    }
    return eval_custom(t);
  }

  double l2_norm_sq() const { return l2_norm_sq_; }
  double abs_moment(double s) const;
  KernelKind kind() const { return kind_; }
  const std::string& name() const { return name_; }

private:
  Kernel() = default;
  double eval_custom(double t) const;

  KernelKind kind_ = KernelKind::epanechnikov;
  std::string name_ = "epanechnikov";
  std::function<double(double)> k_;
  double l2_norm_sq_ = 0.6;
  std::function<double(double)> abs_moment_;
};

//! Parses "epanechnikov"; other names throw DataError.
Kernel kernel_by_name(const std::string& name);

} // namespace adasmooth
