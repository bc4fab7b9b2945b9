#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ttwopt/tensor.hpp"
#include "ttwopt/tt.hpp"

namespace ttwopt {

/// A completion problem: observed data x, binary weight tensor w (1 observed,
/// 0 missing) and the cached masked data y = w * x. Immutable once built.
class ObservedProblem {
public:
    /// Throws if shapes differ or w has an entry other than exactly 0.0/1.0.
    ObservedProblem(DenseTensor x, DenseTensor w);

    const Shape& shape() const { return x_.shape(); }
    const DenseTensor& x() const { return x_; }
    const DenseTensor& w() const { return w_; }
    const DenseTensor& y() const { return y_; }

    index_t n_observed() const { return n_observed_; }
    index_t n_missing() const { return x_.size() - n_observed_; }

    double half_y_norm2() const { return half_y_norm2_; }
    /// Mean / population standard deviation of the observed entries of x
    /// (0 when nothing is observed).
    double observed_mean() const { return observed_mean_; }
    double observed_std() const { return observed_std_; }

private:
    DenseTensor x_;
    DenseTensor w_;
    DenseTensor y_;
    index_t n_observed_ = 0;
    double half_y_norm2_ = 0.0;
    double observed_mean_ = 0.0;
    double observed_std_ = 0.0;
};

/// Per-core gradients, entry n-1 shaped like core n.
struct GradientSet {
    std::vector<DenseTensor> grads;
};

enum class OptimMethod {
    GradientDescent,     // steepest descent with Armijo backtracking
    ConjugateGradient,   // Polak-Ribiere+ NCG with the same line search
};

struct InitScheme {
    enum class Kind { Gaussian, Uniform };
    Kind kind = Kind::Gaussian;
    /// Gaussian std; nullopt picks a scale from the observed data so that
    /// reconstructed elements start at the magnitude of the observations:
    /// sigma = (std(observed) / sqrt(prod of interior ranks))^(1/N).
    std::optional<double> sigma;
    double lo = -1.0;  // Uniform bounds
    double hi = 1.0;

    static InitScheme gaussian(std::optional<double> sigma = std::nullopt) {
        InitScheme s;
        s.kind = Kind::Gaussian;
        s.sigma = sigma;
        return s;
    }
    static InitScheme uniform(double lo, double hi) {
        InitScheme s;
        s.kind = Kind::Uniform;
        s.lo = lo;
        s.hi = hi;
        return s;
    }
};

struct OptimizerConfig {
    OptimMethod method = OptimMethod::ConjugateGradient;
    index_t max_iters = 1000;
    /// Stop when |f_k - f_{k-1}| / max(f_{k-1}, eps) < rel_tol.
    double rel_tol = 1e-10;
    /// Stop when gradient norm / number of parameters < grad_tol.
    double grad_tol = 1e-8;
    InitScheme init;
    std::uint64_t seed = 0;

    /// Throws on non-positive tolerances or negative max_iters.
    void validate() const;
};

enum class Termination {
    IterationBudget,
    ObjectiveTolerance,
    GradientTolerance,
    LineSearchFailure,
    ZeroGradient,
    Diverged,
};

std::string termination_name(Termination t);

struct TraceRecord {
    index_t iter;
    double f;
    double gnorm;
    double step;
};

/// One record per completed optimizer iteration; f values are always finite
/// (a diverging step terminates the run without being recorded).
struct OptimizerTrace {
    std::vector<TraceRecord> records;
    Termination termination = Termination::IterationBudget;
    double initial_f = 0.0;

    double final_f() const { return records.empty() ? initial_f : records.back().f; }
};

/// Cores filled i.i.d. from the init scheme; deterministic per seed.
/// An unset Gaussian sigma defaults to 1 here (optimize() resolves it from
/// the problem instead).
TTCores init_cores(const Shape& shape, const std::vector<index_t>& ranks,
                   const OptimizerConfig& config);

/// The data-driven default Gaussian init scale for a problem.
double init_sigma_heuristic(const ObservedProblem& p, const std::vector<index_t>& ranks);

/// Weighted objective in expanded form, f = 1/2||Y||^2 - <Y,Z> + 1/2||Z||^2
/// with Z = W * full(tt); algebraically equal to 1/2||Y - Z||^2.
double objective(const ObservedProblem& p, const TTCores& tt);

/// Analytic gradient: the mode-2 unfolding of grad n is
/// (Z_(n) - Y_(n)) (G^{>n}_(1) kron G^{<n}_(n))^T, assembled by contracting
/// the masked residual against the two subchains directly.
GradientSet gradient(const ObservedProblem& p, const TTCores& tt);

/// Runs the weighted optimization loop: init cores from the seed, then
/// iterate (reconstruct, objective, gradients, line-searched update) until a
/// stopping condition. Returns the fitted cores and the iteration trace.
std::pair<TTCores, OptimizerTrace> optimize(const ObservedProblem& p,
                                            const std::vector<index_t>& ranks,
                                            const OptimizerConfig& config);

/// Warm-started variant: runs the same loop from the given cores instead of
/// drawing fresh ones.
std::pair<TTCores, OptimizerTrace> optimize(const ObservedProblem& p, TTCores initial,
                                            const OptimizerConfig& config);

/// Observed entries pass through verbatim, missing ones come from the model:
/// W*X + (1-W)*full(tt).
DenseTensor complete(const ObservedProblem& p, const TTCores& tt);

}  // namespace ttwopt
