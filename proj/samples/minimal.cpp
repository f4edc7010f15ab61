// Exact equivariant kernel on the diagonal against the leading-order prediction.
#include "eqszego/eqszego.hpp"

#include <iomanip>
#include <iostream>

int main() {
    using namespace eqszego;
    const ProjectiveModel model = make_model("s1-cp1-w12");
    const Vec nu = model.default_nu;
    const LocusSample s = require_on_locus(model, nu, project_to_locus(model, nu, model.base_point));
    std::cout << model.description << "\npsi_nu = " << psi_nu(model, nu, s) << ", varsigma = " << s.varsigma << "\n";
    std::cout << std::setw(6) << "k" << std::setw(16) << "exact" << std::setw(16) << "predicted" << std::setw(12) << "ratio\n";
    for (int k = 16; k <= 512; k *= 2) {
        const double exact = equivariant_kernel(model, nu, k, s.x, s.x).value.real();
        const double pred = predict_diagonal(model, nu, s, k).value.real();
        std::cout << std::setw(6) << k << std::setw(16) << exact << std::setw(16) << pred << std::setw(12) << exact / pred << "\n";
    }
    std::cout << "isotypic dim at k = 100: " << isotypic_dim(model, nu, 100) << ", delta0 = " << predict_dim_coeff(model, nu).delta0
              << "\n";
}
