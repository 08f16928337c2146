#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "lfpp/errors.hpp"
#include "lfpp/grid.hpp"
#include "lfpp/rng.hpp"

namespace lfpp {

inline constexpr int kDgffDenseBudget = 4096;  // max interior vertices

/// Lattice box for the discrete GFF.  Vertices are (i, j) with
/// 0 <= i < width, 0 <= j < height; the outer ring is the Dirichlet
/// boundary, everything else interior.
struct DgffSpec {
    int n = 1;            // N = 2^n
    double margin = 0.25; // epsilon for the enlarged box variants
    int width = 2;        // vertices along x
    int height = 2;       // vertices along y

    static DgffSpec square(int n) {
        require(n >= 1, "DgffSpec: n must be >= 1");
        DgffSpec s;
        s.n = n;
        s.width = s.height = 1 << n;
        return s;
    }

    /// The strip V_N^{Gamma,eps}: [-floor(eps*Gamma*N), Gamma*N + floor(eps*Gamma*N) - 1]
    /// x [-floor(eps*N), N + floor(eps*N) + 1], sides in lattice units.
    static DgffSpec strip(int n, int gamma_factor, double eps) {
        require(n >= 1 && gamma_factor >= 1, "DgffSpec: bad strip parameters");
        require(eps > 0.0 && eps < 0.5, "DgffSpec: eps must be in (0, 1/2)");
        DgffSpec s;
        s.n = n;
        s.margin = eps;
        const int N = 1 << n;
        const int mx = static_cast<int>(std::floor(eps * gamma_factor * N));
        const int my = static_cast<int>(std::floor(eps * N));
        s.width = gamma_factor * N + 2 * mx;
        s.height = N + 2 * my + 2;
        return s;
    }

    int vertex_count() const { return width * height; }
    int interior_count() const {
        return std::max(0, (width - 2) * (height - 2));
    }
    bool is_boundary(int i, int j) const {
        return i == 0 || j == 0 || i == width - 1 || j == height - 1;
    }
};

namespace dgff_detail {

/// Interior indexing: row-major over the (width-2) x (height-2) core.
inline int interior_index(const DgffSpec& s, int i, int j) {
    return (j - 1) * (s.width - 2) + (i - 1);
}

struct GreenData {
    Eigen::MatrixXd green;      // symmetrized G
    Eigen::MatrixXd factor;     // lower Cholesky factor of G
    double asymmetry = 0.0;     // max |G - G^T| before symmetrization
};

inline std::shared_ptr<const GreenData> compute_green(const DgffSpec& spec) {
    const int m = spec.interior_count();
    if (m > kDgffDenseBudget)
        throw CapacityError("dgff: interior count " + std::to_string(m) +
                            " exceeds dense budget " + std::to_string(kDgffDenseBudget));
    auto data = std::make_shared<GreenData>();
    if (m == 0) return data;

    // M = I - A/4 on the interior; G = M^{-1} is the SRW Green matrix.
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(m) * 5);
    for (int j = 1; j < spec.height - 1; ++j)
        for (int i = 1; i < spec.width - 1; ++i) {
            const int r = interior_index(spec, i, j);
            trip.emplace_back(r, r, 1.0);
            const int di[4] = {1, -1, 0, 0};
            const int dj[4] = {0, 0, 1, -1};
            for (int d = 0; d < 4; ++d) {
                const int ni = i + di[d], nj = j + dj[d];
                if (!spec.is_boundary(ni, nj))
                    trip.emplace_back(r, interior_index(spec, ni, nj), -0.25);
            }
        }
    Eigen::SparseMatrix<double> M(m, m);
    M.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(M);
    if (llt.info() != Eigen::Success)
        throw NumericError("dgff: sparse factorization of the Laplace system failed");

    Eigen::MatrixXd G(m, m);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
    for (int c = 0; c < m; ++c) {
        e(c) = 1.0;
        G.col(c) = llt.solve(e);
        e(c) = 0.0;
    }
    data->asymmetry = (G - G.transpose()).cwiseAbs().maxCoeff();
    data->green = 0.5 * (G + G.transpose());

    Eigen::LLT<Eigen::MatrixXd> dense(data->green);
    if (dense.info() != Eigen::Success)
        throw NumericError("dgff: Green matrix is not positive definite");
    data->factor = dense.matrixL();
    return data;
}

inline std::shared_ptr<const GreenData> green_cache(const DgffSpec& spec) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::shared_ptr<const GreenData>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(spec.width, spec.height);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto data = compute_green(spec);
    cache.emplace(key, data);
    return data;
}

}  // namespace dgff_detail

/// Green matrix of SRW on the box, killed at the boundary ring.
inline Eigen::MatrixXd green_matrix(const DgffSpec& spec) {
    return dgff_detail::green_cache(spec)->green;
}

/// Lower-triangular factor L with L L^T = G (plus diagnostics).
struct GreenFactor {
    int dimension = 0;
    Eigen::MatrixXd factor;
    double reconstruction_residual = 0.0;  // max|LL^T - G| / max|G|
    double asymmetry = 0.0;
};

inline GreenFactor green_factor(const DgffSpec& spec) {
    auto data = dgff_detail::green_cache(spec);
    GreenFactor f;
    f.dimension = spec.interior_count();
    f.factor = data->factor;
    f.asymmetry = data->asymmetry;
    if (f.dimension > 0) {
        const Eigen::MatrixXd rec = data->factor * data->factor.transpose();
        f.reconstruction_residual = (rec - data->green).cwiseAbs().maxCoeff() /
                                    data->green.cwiseAbs().maxCoeff();
    }
    return f;
}

/// Exact DGFF sample: eta = L z on the interior, zero on the boundary.
inline FieldSample sample_dgff_exact(const DgffSpec& spec, std::uint64_t seed) {
    auto data = dgff_detail::green_cache(spec);
    const int m = spec.interior_count();

    FieldSample f;
    f.grid = GridSpec(static_cast<std::uint32_t>(spec.width),
                      static_cast<std::uint32_t>(spec.height), 1.0);
    f.values.assign(f.grid.cells(), 0.0);
    f.band = Band{std::exp2(-spec.n), 1.0};
    f.generator = Generator::DgffExact;
    f.seed = seed;
    if (m == 0) return f;

    rng::Xoshiro256pp gen(
        rng::substream(seed, static_cast<std::uint64_t>(rng::ModuleId::DgffExact)));
    Eigen::VectorXd z(m);
    for (int i = 0; i < m; ++i) z(i) = gen.normal();
    const Eigen::VectorXd eta = data->factor * z;
    for (int j = 1; j < spec.height - 1; ++j)
        for (int i = 1; i < spec.width - 1; ++i)
            f.values[f.grid.index(i, j)] = eta(dgff_detail::interior_index(spec, i, j));
    return f;
}

// ---------------------------------------------------------------------------
// Lazy-walk band decomposition.  K_{N,k}(v,w) = 1/2 sum_{4^{k-1} <= t < 4^k}
// P^v(S_t = w) for the lazy SRW (hold 1/2, each neighbor 1/8); the kernel is
// computed by spectral exponentiation of the one-step characteristic function
// on an enlarged torus and sampled by spectral synthesis.

namespace dgff_detail {

/// One-step lazy-walk characteristic function value at angles (tx, ty).
inline double lazy_cf(double tx, double ty) {
    return 0.5 + 0.25 * (std::cos(tx) + std::cos(ty));
}

/// sum_{t=t0}^{t1-1} lambda^t, stable near lambda = 1.
inline double geometric_block(double lambda, double t0, double t1) {
    if (lambda <= 0.0) return (t0 == 0.0) ? 1.0 : 0.0;  // lambda = 0: only t = 0
    const double lg = std::log(lambda);
    if (lg > -1e-14) return t1 - t0;  // lambda == 1
    return (std::expm1(t1 * lg) - std::expm1(t0 * lg)) / std::expm1(lg);
}

/// Chernoff tail bound P(|coordinate displacement| >= a) at time t for the
/// lazy walk; used to size the torus so wrap-around mass stays below 1e-8.
inline double lazy_tail_bound(double a, double t) {
    double best = 1.0;
    for (double lam = 0.01; lam <= 8.0; lam += 0.01) {
        const double log_mgf = std::log(0.75 + 0.25 * std::cosh(lam));
        best = std::min(best, std::exp(-lam * a + t * log_mgf));
    }
    return 2.0 * best;
}

inline int next_pow2(int v) {
    int p = 1;
    while (p < v) p <<= 1;
    return p;
}

/// Smallest FFT-friendly size (2^a * {1,3,5,9,15}) >= v.
inline int next_fft_size(int v) {
    int best = next_pow2(v);
    for (int odd : {3, 5, 9, 15}) {
        int p = odd;
        while (p < v) p <<= 1;
        best = std::min(best, p);
    }
    return best;
}

inline std::mutex& fftw_mutex() {
    static std::mutex mu;
    return mu;
}

}  // namespace dgff_detail

/// Margin (in lattice units) needed for wrap-around mass < 1e-8 at band k.
inline int dgff_band_margin(int k) {
    static std::mutex mu;
    static std::map<int, int> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(k);
    if (it != cache.end()) return it->second;
    const double t = std::pow(4.0, k);
    double a = 1.0;
    while (2.0 * dgff_detail::lazy_tail_bound(a, t) > 1e-8) a *= 1.25;
    const int m = static_cast<int>(std::ceil(a));
    cache.emplace(k, m);
    return m;
}

/// Stationary Gaussian field with covariance kernel K_{N,k}, synthesized on
/// an enlarged torus and restricted to the box.
inline FieldSample sample_dgff_band(const DgffSpec& spec, int k, std::uint64_t seed) {
    require(k >= 1 && k <= spec.n, "sample_dgff_band: need 1 <= k <= n");
    const int margin = dgff_band_margin(k);
    const int mx = dgff_detail::next_fft_size(spec.width + margin);
    const int my = dgff_detail::next_fft_size(spec.height + margin);
    if (2.0 * dgff_detail::lazy_tail_bound(
            static_cast<double>(std::min(mx - spec.width, my - spec.height)),
            std::pow(4.0, k)) > 1e-8)
        throw ResolutionError("sample_dgff_band: torus too small for wrap-around budget");

    const std::size_t real_n = static_cast<std::size_t>(mx) * my;
    const std::size_t cplx_n = static_cast<std::size_t>(my) * (mx / 2 + 1);
    std::vector<double> z(real_n);
    rng::Xoshiro256pp gen(rng::substream(
        seed, static_cast<std::uint64_t>(rng::ModuleId::DgffBand), static_cast<std::uint64_t>(k)));
    for (auto& v : z) v = gen.normal();

    std::vector<std::complex<double>> spec_buf(cplx_n);
    fftw_plan fwd, bwd;
    {
        std::lock_guard<std::mutex> lock(dgff_detail::fftw_mutex());
        fwd = fftw_plan_dft_r2c_2d(my, mx, z.data(),
                                   reinterpret_cast<fftw_complex*>(spec_buf.data()),
                                   FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_2d(my, mx,
                                   reinterpret_cast<fftw_complex*>(spec_buf.data()),
                                   z.data(), FFTW_ESTIMATE);
    }
    fftw_execute(fwd);

    const double t0 = std::pow(4.0, k - 1), t1 = std::pow(4.0, k);
    const double norm = 1.0 / (static_cast<double>(mx) * my);
    for (int jy = 0; jy < my; ++jy) {
        const double ty = 2.0 * M_PI * jy / my;
        for (int jx = 0; jx <= mx / 2; ++jx) {
            const double tx = 2.0 * M_PI * jx / mx;
            const double lambda = dgff_detail::lazy_cf(tx, ty);
            const double khat = 0.5 * dgff_detail::geometric_block(lambda, t0, t1);
            spec_buf[static_cast<std::size_t>(jy) * (mx / 2 + 1) + jx] *=
                std::sqrt(std::max(0.0, khat)) * norm;
        }
    }
    fftw_execute(bwd);
    {
        std::lock_guard<std::mutex> lock(dgff_detail::fftw_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
    }

    FieldSample f;
    f.grid = GridSpec(static_cast<std::uint32_t>(spec.width),
                      static_cast<std::uint32_t>(spec.height), 1.0);
    f.values.resize(f.grid.cells());
    const int N = 1 << spec.n;
    f.band = Band{std::exp2(k - 1) / N, std::min(1.0, std::exp2(k) / N)};
    f.generator = Generator::DgffBand;
    f.seed = seed;
    for (int j = 0; j < spec.height; ++j)
        for (int i = 0; i < spec.width; ++i)
            f.values[f.grid.index(i, j)] = z[static_cast<std::size_t>(j) * mx + i];
    return f;
}

inline double dgff_band_variance(int k, int torus_x, int torus_y) {
    const double t0 = std::pow(4.0, k - 1), t1 = std::pow(4.0, k);
    double acc = 0.0;
    for (int jy = 0; jy < torus_y; ++jy) {
        const double ty = 2.0 * M_PI * jy / torus_y;
        for (int jx = 0; jx < torus_x; ++jx) {
            const double tx = 2.0 * M_PI * jx / torus_x;
            acc += 0.5 * dgff_detail::geometric_block(dgff_detail::lazy_cf(tx, ty), t0, t1);
        }
    }
    return acc / (static_cast<double>(torus_x) * torus_y);
}

/// The surrogate total field K_N = sum_k K_{N,k}: pointwise sum of the
/// independent band samples, k ascending.
inline FieldSample sample_dgff_band_total(const DgffSpec& spec, std::uint64_t seed) {
    FieldSample total;
    for (int k = 1; k <= spec.n; ++k) {
        FieldSample b = sample_dgff_band(spec, k, seed);
        if (k == 1) {
            total = std::move(b);
        } else {
            for (std::size_t i = 0; i < total.values.size(); ++i)
                total.values[i] += b.values[i];
        }
    }
    total.band = Band{std::exp2(-spec.n), 1.0};
    return total;
}

}  // namespace lfpp
