#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <vector>

#include "patchfill/guides.hpp"

namespace pf {

namespace {

// Texture weights for one smoothing round. wx(p) couples p with its right
// neighbor, wy(p) with the one below; the trailing column/row is zeroed so
// every weight references an in-bounds pair.
void texture_weights(const PlaneImage& x, double sigma, double sharpness,
                     std::vector<double>* wx, std::vector<double>* wy) {
    const int w = x.width, h = x.height, c = x.channels;
    const double vareps = 0.001;
    const size_t n = x.pixel_count();
    wx->assign(n, 0.0);
    wy->assign(n, 0.0);

    PlaneImage blurred = gaussian_blur(x, sigma);

    for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < w; ++xx) {
            double grad = 0, bx = 0, by = 0;
            for (int k = 0; k < c; ++k) {
                const double fx = (xx + 1 < w) ? x.at(xx + 1, y, k) - x.at(xx, y, k) : 0.0;
                const double fy = (y + 1 < h) ? x.at(xx, y + 1, k) - x.at(xx, y, k) : 0.0;
                grad += std::sqrt(fx * fx + fy * fy);
                if (xx + 1 < w) bx += std::fabs(blurred.at(xx + 1, y, k) - blurred.at(xx, y, k));
                if (y + 1 < h) by += std::fabs(blurred.at(xx, y + 1, k) - blurred.at(xx, y, k));
            }
            const double wto = 1.0 / std::max(grad / c, sharpness);
            const double wtbx = 1.0 / std::max(bx / c, vareps);
            const double wtby = 1.0 / std::max(by / c, vareps);
            const size_t i = static_cast<size_t>(y) * w + xx;
            (*wx)[i] = (xx + 1 < w) ? wtbx * wto : 0.0;
            (*wy)[i] = (y + 1 < h) ? wtby * wto : 0.0;
        }
}

}  // namespace

PlaneImage rtv_smooth(const PlaneImage& rgb, double lambda, double sigma, int iterations) {
    PF_CHECK(rgb.channels == 1 || rgb.channels == 3, "rtv_smooth expects gray or RGB");
    PF_CHECK(lambda > 0 && sigma > 0 && iterations >= 1, "rtv_smooth: bad parameters");

    const int w = rgb.width, h = rgb.height, c = rgb.channels;
    const size_t n = rgb.pixel_count();
    const double lam = lambda / 2.0;  // split between the two difference terms

    PlaneImage x = rgb;
    std::vector<double> wx, wy;
    double sigma_iter = sigma;

    for (int iter = 0; iter < iterations; ++iter) {
        texture_weights(x, sigma_iter, 0.02, &wx, &wy);

        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(n * 5);
        std::vector<double> diag(n, 1.0);
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < w; ++xx) {
                const auto p = static_cast<Eigen::Index>(static_cast<size_t>(y) * w + xx);
                const size_t i = static_cast<size_t>(p);
                if (wx[i] != 0.0) {
                    const double v = lam * wx[i];
                    diag[i] += v;
                    diag[i + 1] += v;
                    trips.emplace_back(p, p + 1, -v);
                    trips.emplace_back(p + 1, p, -v);
                }
                if (wy[i] != 0.0) {
                    const double v = lam * wy[i];
                    diag[i] += v;
                    diag[i + static_cast<size_t>(w)] += v;
                    trips.emplace_back(p, p + w, -v);
                    trips.emplace_back(p + w, p, -v);
                }
            }
        for (size_t i = 0; i < n; ++i)
            trips.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i),
                               diag[i]);

        Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(n),
                                      static_cast<Eigen::Index>(n));
        A.setFromTriplets(trips.begin(), trips.end());

        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
        solver.compute(A);
        PF_ASSERT(solver.info() == Eigen::Success, "RTV factorization failed");

        for (int k = 0; k < c; ++k) {
            Eigen::VectorXd b(static_cast<Eigen::Index>(n));
            for (size_t i = 0; i < n; ++i)
                b[static_cast<Eigen::Index>(i)] = rgb.data[i * static_cast<size_t>(c) +
                                                           static_cast<size_t>(k)];
            Eigen::VectorXd s = solver.solve(b);
            PF_ASSERT(solver.info() == Eigen::Success, "RTV solve failed");
            const double residual = (A * s - b).norm() / std::max(b.norm(), 1e-12);
            PF_ASSERT(residual <= 1e-6,
                      "RTV solve residual too large: " + std::to_string(residual));
            for (size_t i = 0; i < n; ++i)
                x.data[i * static_cast<size_t>(c) + static_cast<size_t>(k)] =
                    static_cast<float>(s[static_cast<Eigen::Index>(i)]);
        }
        sigma_iter = std::max(sigma_iter / 2.0, 0.5);
    }

    for (float& v : x.data) v = std::clamp(v, 0.f, 1.f);
    return x;
}

}  // namespace pf
