#include <cfm/descriptors.hpp>
#include <cfm/error.hpp>

#include <cmath>

namespace cfm {

DescriptorSet wks(const SpectralBasis& basis, int d)
{
    require(d >= 2, Errc::invalid_argument, "WKS needs at least 2 energies");
    require(basis.k() >= 3, Errc::invalid_argument, "WKS needs at least 3 eigenpairs");
    const double lambda_min = basis.lambda[1];
    const double lambda_max = basis.lambda[basis.k() - 1];
    require(lambda_min > 0.0, Errc::invalid_argument, "second eigenvalue must be positive");
    require(lambda_max > lambda_min, Errc::invalid_argument, "eigenvalue range is empty");

    // spacing·(d−1) = (log λ_k − log λ₂) − 4σ with σ = 7·spacing.
    const double lo = std::log(lambda_min);
    const double hi = std::log(lambda_max);
    const double spacing = (hi - lo) / (d - 1 + 28);
    const double sigma = 7.0 * spacing;

    DescriptorSet out;
    out.sigma = sigma;
    out.energies.resize(d);
    for (int t = 0; t < d; ++t) out.energies[t] = lo + 2.0 * sigma + spacing * t;

    const int m = basis.k() - 1;
    const Eigen::VectorXd log_lambda = basis.lambda.tail(m).array().log();
    const Eigen::MatrixXd squared = basis.phi.rightCols(m).array().square();

    // weights(l, t) = exp(−(e_t − log λ_l)² / 2σ²), normalized over l.
    Eigen::MatrixXd weights(m, d);
    for (int t = 0; t < d; ++t) {
        weights.col(t) = (-(out.energies[t] - log_lambda.array()).square() / (2.0 * sigma * sigma)).exp();
        weights.col(t) /= weights.col(t).sum();
    }

    out.values = squared * weights;
    const double n = static_cast<double>(basis.n());
    for (int t = 0; t < d; ++t) out.values.col(t) *= n / out.values.col(t).sum();
    return out;
}

} // namespace cfm
