// The epsilon family: input norms stay fixed while the q = 1 lower bound on the
// product norm grows with a = 1/eps.
#include <cstdio>

#include "wicknorm/wicknorm.hpp"

using namespace wicknorm;

int main() {
    const EpsConfig cfg;
    const DivergenceCurve c = theorem42_divergence(cfg, {1e2, 1e3, 1e4});
    std::printf("%10s %16s %16s\n", "a", "lower bound", "input norm");
    for (const auto& p : c.points) std::printf("%10g %16.8g %16.12g\n", p.parameter, p.value(), p.aux);
    std::printf("log-log slope %.4f (predicted %.4f)\n", c.fitted_slope, c.predicted_slope);
}
