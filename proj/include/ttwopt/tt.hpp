#pragma once

#include <vector>

#include "ttwopt/tensor.hpp"

namespace ttwopt {

/// Guard against accidentally materializing astronomically large tensors.
inline constexpr index_t kFullElementCap = 100'000'000;

/// Tensor-train representation: N three-way cores, core n of shape
/// (r_{n-1}, I_n, r_n) with rank chain (r_0, r_1, ..., r_N), r_0 = r_N = 1.
/// Element (i_1,...,i_N) of the represented tensor is the matrix product
/// of the lateral core slices, G^(1)[:,i_1,:] * ... * G^(N)[:,i_N,:].
class TTCores {
public:
    /// Validates the rank chain; throws std::invalid_argument on a border
    /// rank != 1, a non-3-way core, or adjacent rank disagreement.
    explicit TTCores(std::vector<DenseTensor> cores);

    index_t order() const { return static_cast<index_t>(cores_.size()); }
    /// Shape (I_1, ..., I_N) of the represented tensor.
    const Shape& shape() const { return shape_; }
    /// Rank chain (r_0, ..., r_N), length N+1.
    const std::vector<index_t>& ranks() const { return ranks_; }
    index_t rank(index_t n) const { return ranks_[static_cast<std::size_t>(n)]; }

    /// Core n, 1-based.
    const DenseTensor& core(index_t n) const;
    DenseTensor& core(index_t n);
    const std::vector<DenseTensor>& cores() const { return cores_; }

private:
    std::vector<DenseTensor> cores_;
    Shape shape_;
    std::vector<index_t> ranks_;
};

/// Element (i_1,...,i_N) (1-based) as the ordered product of core slices.
double eval_element(const TTCores& tt, const std::vector<index_t>& index);

/// Dense reconstruction by sequential chain contraction, O(N * r^2 * prod I).
/// Throws if the element count exceeds cap.
DenseTensor full(const TTCores& tt, index_t cap = kFullElementCap);

/// G^{>n}: cores n+1..N contracted into shape (r_n, I_{n+1}, ..., I_N).
/// The boundary G^{>N} is the 1x1 tensor holding 1.
DenseTensor subchain_right(const TTCores& tt, index_t n);

/// G^{<n}: cores 1..n-1 contracted into shape (I_1, ..., I_{n-1}, r_{n-1}).
/// The boundary G^{<1} is the 1x1 tensor holding 1.
DenseTensor subchain_left(const TTCores& tt, index_t n);

/// Total parameter count, sum_n r_{n-1} * I_n * r_n.
index_t num_params(const TTCores& tt);

namespace detail {

/// Forward chain matrices: element n (0-based n = 0..N) is the contraction
/// of cores 1..n as a (I_1*...*I_n) x r_n column-major matrix; entry 0 is
/// the 1x1 identity and entry N is the flattened full tensor.
std::vector<Matrix> left_chain_matrices(const TTCores& tt);

/// Backward chain matrices: element n (0-based n = 0..N) is the contraction
/// of cores n+1..N as a r_n x (I_{n+1}*...*I_N) column-major matrix; entry N
/// is the 1x1 identity.
std::vector<Matrix> right_chain_matrices(const TTCores& tt);

}  // namespace detail

}  // namespace ttwopt
