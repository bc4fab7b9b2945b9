#include "ttwopt/evaluation.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include "parallel.hpp"

namespace ttwopt {

CPFactors::CPFactors(std::vector<Matrix> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw std::invalid_argument("CPFactors: needs at least one factor");
    rank_ = factors_.front().cols();
    if (rank_ < 1) throw std::invalid_argument("CPFactors: rank must be >= 1");
    for (const Matrix& f : factors_) {
        if (f.cols() != rank_)
            throw std::invalid_argument("CPFactors: factors must share the column count " +
                                        std::to_string(rank_));
        if (f.rows() < 1) throw std::invalid_argument("CPFactors: factor with no rows");
    }
}

const Matrix& CPFactors::factor(index_t n) const {
    if (n < 1 || n > order()) throw std::out_of_range("CPFactors::factor: index out of range");
    return factors_[static_cast<std::size_t>(n - 1)];
}

DenseTensor cp_to_dense(const CPFactors& f) {
    const index_t n_modes = f.order();
    std::vector<index_t> dims;
    dims.reserve(static_cast<std::size_t>(n_modes));
    for (index_t n = 1; n <= n_modes; ++n) dims.push_back(f.factor(n).rows());
    DenseTensor out((Shape(dims)));

    std::vector<index_t> idx(static_cast<std::size_t>(n_modes), 0);  // 0-based odometer
    double* po = out.data();
    const index_t total = out.size();
    const index_t rank = f.rank();
    for (index_t off = 0; off < total; ++off) {
        double acc = 0.0;
        for (index_t r = 0; r < rank; ++r) {
            double prod = 1.0;
            for (index_t n = 0; n < n_modes; ++n)
                prod *= f.factor(n + 1)(idx[static_cast<std::size_t>(n)], r);
            acc += prod;
        }
        po[off] = acc;
        for (index_t n = 0; n < n_modes; ++n) {
            auto nu = static_cast<std::size_t>(n);
            if (++idx[nu] < dims[nu]) break;
            idx[nu] = 0;
        }
    }
    return out;
}

DenseTensor gen_cp_problem(const std::vector<index_t>& dims, index_t rank, std::uint64_t seed) {
    if (rank < 1) throw std::invalid_argument("gen_cp_problem: rank must be >= 1");
    const Shape shape(dims);  // validates dims
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<Matrix> factors;
    factors.reserve(dims.size());
    for (index_t n = 1; n <= shape.order(); ++n) {
        Matrix f(shape.dim(n), rank);
        for (Eigen::Index j = 0; j < f.cols(); ++j)
            for (Eigen::Index i = 0; i < f.rows(); ++i) f(i, j) = dist(rng);
        factors.push_back(std::move(f));
    }
    return cp_to_dense(CPFactors(std::move(factors)));
}

DenseTensor gen_mask(const std::vector<index_t>& dims, double missing_rate, std::uint64_t seed) {
    if (!(missing_rate >= 0.0 && missing_rate <= 1.0))
        throw std::invalid_argument("gen_mask: missing_rate must be in [0, 1]");
    const Shape shape(dims);
    const index_t total = shape.count();
    const index_t n_zero = std::llround(missing_rate * static_cast<double>(total));

    DenseTensor mask = DenseTensor::ones(shape);
    if (n_zero == 0) return mask;

    // fixed-count sampling: partial Fisher-Yates picks the zero positions
    std::vector<index_t> positions(static_cast<std::size_t>(total));
    std::iota(positions.begin(), positions.end(), index_t{0});
    std::mt19937_64 rng(seed);
    for (index_t i = 0; i < n_zero; ++i) {
        std::uniform_int_distribution<index_t> pick(i, total - 1);
        std::swap(positions[static_cast<std::size_t>(i)],
                  positions[static_cast<std::size_t>(pick(rng))]);
        mask[positions[static_cast<std::size_t>(i)]] = 0.0;
    }
    return mask;
}

double rse(const DenseTensor& x, const DenseTensor& xhat) {
    if (x.shape() != xhat.shape())
        throw std::invalid_argument("rse: shape mismatch " + x.shape().str() + " vs " +
                                    xhat.shape().str());
    const double* px = x.data();
    const double* ph = xhat.data();
    double err2 = 0.0, ref2 = 0.0;
    for (index_t i = 0, n = x.size(); i < n; ++i) {
        const double d = px[i] - ph[i];
        err2 += d * d;
        ref2 += px[i] * px[i];
    }
    if (ref2 == 0.0) throw std::invalid_argument("rse: reference tensor has zero norm");
    return std::sqrt(err2 / ref2);
}

namespace {

double psnr_from_mse(double mse, double peak) {
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

}  // namespace

double psnr(const DenseTensor& x, const DenseTensor& xhat, double peak) {
    if (x.shape() != xhat.shape())
        throw std::invalid_argument("psnr: shape mismatch " + x.shape().str() + " vs " +
                                    xhat.shape().str());
    const double* px = x.data();
    const double* ph = xhat.data();
    double err2 = 0.0;
    const index_t n = x.size();
    for (index_t i = 0; i < n; ++i) {
        const double d = px[i] - ph[i];
        err2 += d * d;
    }
    return psnr_from_mse(err2 / static_cast<double>(n), peak);
}

double psnr_over_missing(const DenseTensor& x, const DenseTensor& xhat, const DenseTensor& w,
                         double peak) {
    if (x.shape() != xhat.shape() || x.shape() != w.shape())
        throw std::invalid_argument("psnr_over_missing: shape mismatch");
    const double* px = x.data();
    const double* ph = xhat.data();
    const double* pw = w.data();
    double err2 = 0.0;
    index_t count = 0;
    for (index_t i = 0, n = x.size(); i < n; ++i) {
        if (pw[i] == 0.0) {
            const double d = px[i] - ph[i];
            err2 += d * d;
            ++count;
        }
    }
    if (count == 0) throw std::invalid_argument("psnr_over_missing: mask has no missing entries");
    return psnr_from_mse(err2 / static_cast<double>(count), peak);
}

GradientSet finite_diff_gradient(const ObservedProblem& p, const TTCores& tt, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("finite_diff_gradient: h must be > 0");
    if (tt.shape() != p.shape())
        throw std::invalid_argument("finite_diff_gradient: shape mismatch");

    const index_t n_modes = tt.order();
    std::vector<index_t> core_offset(static_cast<std::size_t>(n_modes + 1), 0);
    for (index_t n = 1; n <= n_modes; ++n)
        core_offset[static_cast<std::size_t>(n)] =
            core_offset[static_cast<std::size_t>(n - 1)] + tt.core(n).size();
    const index_t total = core_offset.back();

    GradientSet out;
    out.grads.reserve(static_cast<std::size_t>(n_modes));
    for (index_t n = 1; n <= n_modes; ++n) out.grads.emplace_back(tt.core(n).shape());

    // each parameter is perturbed independently, so chunks may run on any
    // thread with a private copy of the cores
    parallel_for(total, [&](index_t lo, index_t hi) {
        TTCores scratch = tt;
        for (index_t k = lo; k < hi; ++k) {
            index_t n = 1;
            while (core_offset[static_cast<std::size_t>(n)] <= k) ++n;
            const index_t local = k - core_offset[static_cast<std::size_t>(n - 1)];
            double* slot = scratch.core(n).data() + local;
            const double saved = *slot;
            *slot = saved + h;
            const double f_plus = objective(p, scratch);
            *slot = saved - h;
            const double f_minus = objective(p, scratch);
            *slot = saved;
            out.grads[static_cast<std::size_t>(n - 1)][local] = (f_plus - f_minus) / (2.0 * h);
        }
    });
    return out;
}

double max_rel_error(const GradientSet& a, const GradientSet& b, double floor) {
    if (a.grads.size() != b.grads.size())
        throw std::invalid_argument("max_rel_error: gradient sets differ in length");
    double worst = 0.0;
    for (std::size_t n = 0; n < a.grads.size(); ++n) {
        if (a.grads[n].shape() != b.grads[n].shape())
            throw std::invalid_argument("max_rel_error: gradient shapes differ");
        const double* pa = a.grads[n].data();
        const double* pb = b.grads[n].data();
        for (index_t i = 0, m = a.grads[n].size(); i < m; ++i) {
            const double denom = std::max({std::abs(pa[i]), std::abs(pb[i]), floor});
            worst = std::max(worst, std::abs(pa[i] - pb[i]) / denom);
        }
    }
    return worst;
}

}  // namespace ttwopt
