#pragma once

#include <cmath>

#include <Eigen/Core>

namespace pgo {

template <int N>
struct SymEigen {
    Eigen::Matrix<double, N, 1> values;   // ascending
    Eigen::Matrix<double, N, N> vectors;  // column k pairs with values(k)
    int sweeps = 0;
};

/*
 * Cyclic Jacobi eigen-decomposition of a small symmetric matrix.
 *
 * Rotations are applied until the off-diagonal Frobenius mass drops below
 * tol times the total Frobenius norm. This is the only eigen-solver used in
 * the toolkit: nearest-rotation projection, matrix square roots of the
 * noise weights and spectral bounds all go through it.
 */
template <int N>
SymEigen<N> symmetric_eigen(const Eigen::Matrix<double, N, N>& input, double tol = 1e-12,
                            int max_sweeps = 64) {
    using Mat = Eigen::Matrix<double, N, N>;
    Mat a = 0.5 * (input + input.transpose());
    Mat v = Mat::Identity();
    const double scale = a.norm();

    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < N; ++p)
            for (int q = p + 1; q < N; ++q) off += 2.0 * a(p, q) * a(p, q);
        if (std::sqrt(off) <= tol * scale || off == 0.0) break;

        for (int p = 0; p < N - 1; ++p) {
            for (int q = p + 1; q < N; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < N; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < N; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < N; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    SymEigen<N> out;
    out.sweeps = sweep;
    // selection sort into ascending order
    Eigen::Matrix<double, N, 1> d = a.diagonal();
    for (int i = 0; i < N; ++i) {
        int best = i;
        for (int j = i + 1; j < N; ++j)
            if (d(j) < d(best)) best = j;
        if (best != i) {
            std::swap(d(i), d(best));
            v.col(i).swap(v.col(best));
        }
    }
    out.values = d;
    out.vectors = v;
    return out;
}

template <int N>
double max_eigenvalue(const Eigen::Matrix<double, N, N>& m) {
    return symmetric_eigen<N>(m).values(N - 1);
}

template <int N>
double min_eigenvalue(const Eigen::Matrix<double, N, N>& m) {
    return symmetric_eigen<N>(m).values(0);
}

// Principal square root of a symmetric PSD matrix; tiny negative
// eigenvalues from rounding are clamped to zero.
template <int N>
Eigen::Matrix<double, N, N> psd_sqrt(const Eigen::Matrix<double, N, N>& m) {
    const auto e = symmetric_eigen<N>(m);
    Eigen::Matrix<double, N, 1> s = e.values.cwiseMax(0.0).cwiseSqrt();
    return e.vectors * s.asDiagonal() * e.vectors.transpose();
}

}  // namespace pgo
