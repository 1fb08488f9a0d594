#pragma once

namespace scenrel {

/// Standard normal CDF. Φ(-z) is computed from the same tail value as Φ(z),
/// so Φ(z) + Φ(-z) == 1 up to a single rounding.
double normal_cdf(double z);

/// Standard normal quantile Φ⁻¹(p) for p in (0, 1); ±inf at the endpoints.
double normal_quantile(double p);

}  // namespace scenrel
