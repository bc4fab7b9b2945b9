#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ttwopt/tensor.hpp"
#include "ttwopt/tt.hpp"
#include "ttwopt/wopt.hpp"

namespace ttwopt {

/// CP (CANDECOMP/PARAFAC) factor matrices, factor n of shape I_n x R.
/// Used only to generate synthetic test data.
class CPFactors {
public:
    /// Throws unless all factors share a positive column count.
    explicit CPFactors(std::vector<Matrix> factors);

    index_t order() const { return static_cast<index_t>(factors_.size()); }
    index_t rank() const { return rank_; }
    const Matrix& factor(index_t n) const;  // 1-based
    const std::vector<Matrix>& factors() const { return factors_; }

private:
    std::vector<Matrix> factors_;
    index_t rank_ = 0;
};

struct MetricReport {
    double rse = 0.0;
    std::optional<double> psnr;  // dB, image data only
    index_t n_observed = 0;
    index_t n_missing = 0;
};

/// X(i_1,...,i_N) = sum_r prod_n factor_n[i_n, r].
DenseTensor cp_to_dense(const CPFactors& f);

/// Synthetic ground truth: i.i.d. standard Gaussian factors from the seed.
DenseTensor gen_cp_problem(const std::vector<index_t>& dims, index_t rank, std::uint64_t seed);

/// Binary weight tensor with exactly round(missing_rate * count) zeros at a
/// uniformly random subset of positions; deterministic per seed.
DenseTensor gen_mask(const std::vector<index_t>& dims, double missing_rate, std::uint64_t seed);

/// Relative square error sqrt(||x - xhat||^2 / ||x||^2); x must be nonzero.
double rse(const DenseTensor& x, const DenseTensor& xhat);

/// 10*log10(peak^2 / MSE) over all entries, +infinity when MSE is zero.
double psnr(const DenseTensor& x, const DenseTensor& xhat, double peak = 255.0);

/// PSNR restricted to positions where w is zero (the missing entries).
double psnr_over_missing(const DenseTensor& x, const DenseTensor& xhat, const DenseTensor& w,
                         double peak = 255.0);

/// Central-difference gradient oracle, (f(t+h e) - f(t-h e)) / 2h for every
/// core parameter. Test/diagnostic tool, independent of gradient().
GradientSet finite_diff_gradient(const ObservedProblem& p, const TTCores& tt, double h);

/// Largest relative componentwise deviation between two gradient sets
/// (absolute floor guards near-zero components).
double max_rel_error(const GradientSet& a, const GradientSet& b, double floor = 1e-8);

}  // namespace ttwopt
