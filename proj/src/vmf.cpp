#include "pgo/vmf.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "pgo/errors.hpp"

namespace pgo {

namespace {

constexpr int kMaxProposals = 1000;
// Above this the rejection constants lose all precision in double; the
// tangent-plane Gaussian with covariance I/kappa is exact to O(1/kappa^2).
constexpr double kGaussianKappa = 1e10;

double log_i1_series(double x) {
    // I_1(x) = (x/2) sum_k (x^2/4)^k / (k! (k+1)!)
    const double y = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 500; ++k) {
        term *= y / (static_cast<double>(k) * static_cast<double>(k + 1));
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return std::log(0.5 * x) + std::log(sum);
}

double log_i1_asymptotic(double x) {
    // I_nu(x) ~ e^x / sqrt(2 pi x) * sum_k (-1)^k prod_{j<=k} (4 nu^2 - (2j-1)^2) / (k! (8x)^k)
    const double mu = 4.0;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k <= 12; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= -(mu - odd * odd) / (k * 8.0 * x);
        sum += term;
        if (std::abs(term) < 1e-17) break;
    }
    return x - 0.5 * std::log(2.0 * std::numbers::pi * x) + std::log(sum);
}

// Unit vector drawn uniformly from the great sphere orthogonal to mu.
Vec4 orthogonal_direction(const Vec4& mu, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (;;) {
        Vec4 v(normal(rng), normal(rng), normal(rng), normal(rng));
        v -= mu * mu.dot(v);
        const double n = v.norm();
        if (n > 1e-8) return v / n;
    }
}

}  // namespace

double log_bessel_i1(double x) {
    if (x < 0.0 || !std::isfinite(x)) throw std::invalid_argument("log_bessel_i1: x must be finite and >= 0");
    if (x == 0.0) return -std::numeric_limits<double>::infinity();
    return x < 50.0 ? log_i1_series(x) : log_i1_asymptotic(x);
}

double vmf_log_normalizer(double kappa) {
    if (kappa < 0.0) throw std::invalid_argument("vmf: kappa must be >= 0");
    if (kappa == 0.0) return -std::log(2.0 * std::numbers::pi * std::numbers::pi);
    return std::log(kappa) - 2.0 * std::log(2.0 * std::numbers::pi) - log_bessel_i1(kappa);
}

double vmf_logpdf(const VmfParams& params, const Vec4& x) {
    if (std::abs(x.norm() - 1.0) > 1e-6) throw std::invalid_argument("vmf_logpdf: x is not unit");
    return vmf_log_normalizer(params.kappa) + params.kappa * params.mu.dot(x);
}

Vec4 vmf_draw(const VmfParams& params, std::mt19937_64& rng) {
    const double kappa = params.kappa;
    if (kappa < 0.0) throw std::invalid_argument("vmf: kappa must be >= 0");
    const Vec4 mu = params.mu.normalized();

    if (kappa > kGaussianKappa) {
        std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(kappa));
        Vec4 v(normal(rng), normal(rng), normal(rng), normal(rng));
        v -= mu * mu.dot(v);
        return (mu + v).normalized();
    }

    // Wood (1994) with m = 4, written to avoid cancellation in b at large kappa.
    const double b = 3.0 / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + 9.0));
    const double x0 = (1.0 - b) / (1.0 + b);
    const double c = kappa * x0 + 3.0 * std::log(1.0 - x0 * x0);

    std::gamma_distribution<double> gamma(1.5, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    for (int attempt = 0; attempt < kMaxProposals; ++attempt) {
        const double g1 = gamma(rng);
        const double g2 = gamma(rng);
        const double z = g1 / (g1 + g2);
        const double w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
        const double u = uniform(rng);
        if (kappa * w + 3.0 * std::log(1.0 - x0 * w) - c >= std::log(u)) {
            const Vec4 v = orthogonal_direction(mu, rng);
            const Vec4 x = w * mu + std::sqrt(std::max(0.0, 1.0 - w * w)) * v;
            return x.normalized();
        }
    }
    throw NumericalError("vmf sampler: no acceptance after 1000 proposals (kappa = " +
                         std::to_string(kappa) + ")");
}

std::vector<Vec4> vmf_sample(const VmfParams& params, std::uint64_t seed, int count) {
    if (count < 0) throw std::invalid_argument("vmf_sample: count must be >= 0");
    std::mt19937_64 rng(seed);
    std::vector<Vec4> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out.push_back(vmf_draw(params, rng));
    return out;
}

double kappa_from_sigma(double sigma_r, KappaConvention convention) {
    if (!(sigma_r > 0.0)) throw std::invalid_argument("sigma_r must be > 0");
    return convention == KappaConvention::InverseVariance ? 2.0 / (sigma_r * sigma_r)
                                                          : 0.5 * sigma_r * sigma_r;
}

UnitQuaternion sample_rotation_noise(double sigma_r, KappaConvention convention,
                                     std::mt19937_64& rng) {
    VmfParams p;
    p.kappa = kappa_from_sigma(sigma_r, convention);
    return UnitQuaternion::from_vec(vmf_draw(p, rng));
}

UnitQuaternion sample_rotation_noise(double sigma_r, KappaConvention convention,
                                     std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_rotation_noise(sigma_r, convention, rng);
}

}  // namespace pgo
