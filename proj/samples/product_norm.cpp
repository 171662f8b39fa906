// Norm of the (1,1) component of a Wick product of two small kernel families,
// by Monte Carlo, next to the product of the input norms.
#include <cmath>
#include <cstdio>

#include "wicknorm/wicknorm.hpp"

using namespace wicknorm;

int main() {
    const NormParams np{4.0, 2.0, 3, 1.0};

    KernelComponent a;
    a.n = 2;
    a.annihilation.alpha = 1.5;
    a.constraint = SimplexJoint{0.8, SimplexScope::Annihilation};
    a.dimension = 3;

    KernelComponent c;
    c.m = 2;
    c.log_coeff = std::log(0.5);
    c.creation.alpha = 1.5;
    c.constraint = SimplexJoint{0.8, SimplexScope::Creation};
    c.dimension = 3;

    KernelSequence w, v;
    w.insert(a);
    v.insert(c);

    McOptions mc;
    mc.samples = 200000;
    mc.seed = 7;
    const WickProduct prod(w, v, 1, 1, np);
    const McEstimate e = product_component_norm(prod, np, mc);
    std::printf("terms in (1,1) component: %zu\n", prod.terms().size());
    std::printf("|(w*v)_{1,1}| = %.6g +- %.2g\n", e.value, e.std_error);
    std::printf("|w_{0,2}| |v_{2,0}| = %.6g\n", component_norm(a, np).value() * component_norm(c, np).value());
}
