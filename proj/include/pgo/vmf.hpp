#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "pgo/quat.hpp"

namespace pgo {

// von Mises-Fisher distribution on the unit sphere S^3 in R^4.
struct VmfParams {
    Vec4 mu = Vec4(1.0, 0.0, 0.0, 0.0);  // unit mean direction
    double kappa = 0.0;                  // concentration, >= 0
};

// log I_1(x) for x >= 0: power series below 50, asymptotic expansion above.
double log_bessel_i1(double x);

// log c_4(kappa) = log kappa - 2 log(2 pi) - log I_1(kappa); equals
// -log(2 pi^2) at kappa = 0 (uniform density on S^3).
double vmf_log_normalizer(double kappa);

// log c_4(kappa) + kappa mu^T x. Throws std::invalid_argument unless
// |x| = 1 within 1e-6.
double vmf_logpdf(const VmfParams& params, const Vec4& x);

// Wood's rejection sampler. Deterministic for a given seed. Throws
// NumericalError if a single draw needs more than 1000 proposals.
std::vector<Vec4> vmf_sample(const VmfParams& params, std::uint64_t seed, int count);

// Same sampler driven by a caller-owned engine, for generators that draw
// many different distributions from one stream.
Vec4 vmf_draw(const VmfParams& params, std::mt19937_64& rng);

/*
 * How a rotational noise level sigma_r maps to a vMF concentration.
 *
 *   InverseVariance: kappa = 2 / sigma_r^2. Large-kappa vMF is close to a
 *                    Gaussian with covariance 1/kappa, so sigma_r behaves
 *                    as a noise level.
 *   Literal:         kappa = sigma_r^2 / 2, the generator taken at face
 *                    value; larger sigma_r then means less noise.
 */
enum class KappaConvention { InverseVariance, Literal };

double kappa_from_sigma(double sigma_r, KappaConvention convention);

// Draw q_eps ~ vMF(identity, kappa(sigma_r)). sigma_r must be > 0.
UnitQuaternion sample_rotation_noise(double sigma_r, KappaConvention convention,
                                     std::mt19937_64& rng);
UnitQuaternion sample_rotation_noise(double sigma_r, KappaConvention convention,
                                     std::uint64_t seed);

}  // namespace pgo
