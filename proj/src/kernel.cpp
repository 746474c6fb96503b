#include "adasmooth/kernel.hpp"

#include "adasmooth/errors.hpp"

namespace adasmooth {

Kernel
Kernel::epanechnikov()
{
  return Kernel{};
}

Kernel
Kernel::custom(std::string name, std::function<double(double)> k,
               double l2_norm_sq, std::function<double(double)> abs_moment)
{
  if (!k || !abs_moment) {
    throw DataError("custom kernel '" + name + "' needs callables");
  }
  if (!(l2_norm_sq > 0.0)) {
    throw DataError("custom kernel '" + name + "' needs a positive L2 norm");
  }
  Kernel out;
  out.kind_ = KernelKind::custom;
  out.name_ = std::move(name);
  out.k_ = std::move(k);
  out.l2_norm_sq_ = l2_norm_sq;
  out.abs_moment_ = std::move(abs_moment);
  return out;
}

double
Kernel::eval_custom(double t) const
{
  const double v = k_(t);
  if (v < 0.0) {
    throw DataError("kernel '" + name_ + "' is negative at " +
                    std::to_string(t));
  }
  return v;
}

double
Kernel::abs_moment(double s) const
{
  if (kind_ == KernelKind::epanechnikov) {
    return 3.0 / ((s + 1.0) * (s + 3.0));
  }
  return abs_moment_(s);
}

Kernel
kernel_by_name(const std::string& name)
{
  if (name == "epanechnikov") {
    return Kernel::epanechnikov();
  }
  throw DataError("unknown kernel '" + name + "'");
}

} // namespace adasmooth
