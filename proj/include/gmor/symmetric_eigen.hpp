// Cyclic Jacobi eigensolver for small symmetric matrices (3x3 plane
// fitting, 4x4 Horn quaternion alignment). Deterministic, no dependencies.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace gmor::detail {

template <int N>
struct SymmetricEigen {
    std::array<double, N> values{};          // ascending
    std::array<double, N * N> vectors{};     // row-major, row k = eigenvector of values[k]
};

// Classic cyclic Jacobi sweeps; small N, so convergence is a handful of
// sweeps. Eigenpairs sorted ascending with index tie-breaks for determinism.
template <int N>
SymmetricEigen<N> jacobi_eigen(std::array<double, N * N> a) {
    std::array<double, N * N> v{};
    for (int i = 0; i < N; ++i) v[static_cast<std::size_t>(i * N + i)] = 1.0;

    auto at = [](std::array<double, N * N>& m, int r, int c) -> double& {
        return m[static_cast<std::size_t>(r * N + c)];
    };

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < N; ++p)
            for (int q = p + 1; q < N; ++q) off += at(a, p, q) * at(a, p, q);
        if (off < 1e-300) break;

        for (int p = 0; p < N; ++p) {
            for (int q = p + 1; q < N; ++q) {
                const double apq = at(a, p, q);
                if (apq == 0.0) continue;
                const double app = at(a, p, p), aqq = at(a, q, q);
                const double theta = 0.5 * (aqq - app) / apq;
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (int k = 0; k < N; ++k) {
                    const double akp = at(a, k, p), akq = at(a, k, q);
                    at(a, k, p) = c * akp - s * akq;
                    at(a, k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < N; ++k) {
                    const double apk = at(a, p, k), aqk = at(a, q, k);
                    at(a, p, k) = c * apk - s * aqk;
                    at(a, q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < N; ++k) {
                    const double vkp = at(v, k, p), vkq = at(v, k, q);
                    at(v, k, p) = c * vkp - s * vkq;
                    at(v, k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    SymmetricEigen<N> out;
    std::array<int, N> order{};
    for (int i = 0; i < N; ++i) order[static_cast<std::size_t>(i)] = i;
    // insertion sort by eigenvalue, stable
    for (int i = 1; i < N; ++i) {
        const int oi = order[static_cast<std::size_t>(i)];
        int j = i - 1;
        while (j >= 0 &&
               a[static_cast<std::size_t>(order[static_cast<std::size_t>(j)] * N +
                                          order[static_cast<std::size_t>(j)])] >
                   a[static_cast<std::size_t>(oi * N + oi)]) {
            order[static_cast<std::size_t>(j + 1)] = order[static_cast<std::size_t>(j)];
            --j;
        }
        order[static_cast<std::size_t>(j + 1)] = oi;
    }
    for (int k = 0; k < N; ++k) {
        const int col = order[static_cast<std::size_t>(k)];
        out.values[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(col * N + col)];
        for (int r = 0; r < N; ++r)
            out.vectors[static_cast<std::size_t>(k * N + r)] =
                v[static_cast<std::size_t>(r * N + col)];
    }
    return out;
}

}  // namespace gmor::detail
