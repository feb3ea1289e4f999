#include "wsample/rng.hpp"

#include "wsample/errors.hpp"

namespace wsample {

ComplexVector random_unit_circle(Eigen::Index count, Rng& rng) {
  if (count < 0) throw InputError("negative sample count");
  ComplexVector out(count);
  for (Eigen::Index i = 0; i < count; ++i) out[i] = rng.unit_circle();
  return out;
}

ComplexVector random_unit_circle(Eigen::Index count, std::uint64_t seed) {
  Rng rng(seed);
  return random_unit_circle(count, rng);
}

}  // namespace wsample
