// Builds against an installed ditto and checks one value end to end.
#include <cmath>
#include <cstdio>

#include "ditto/diffeo.hpp"

int main() {
  const double y = ditto::f_radial(1.0, 1.0);
  if (std::abs(y - 2.0 * std::exp(1.0) / 3.0) > 1e-12) {
    std::printf("unexpected f(1) = %.17g\n", y);
    return 1;
  }
  return 0;
}
