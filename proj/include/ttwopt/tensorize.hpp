#pragma once

#include <vector>

#include "ttwopt/tensor.hpp"

namespace ttwopt {

/// Reshape/permute/reshape recipe turning an H x W x C image (H = W = 2^k)
/// into a (k+1)-way block tensor whose mode j groups the j-th finest row and
/// column bits, so mode 1 enumerates 2x2 pixel blocks, mode 2 the 2x2 blocks
/// of blocks, and so on; the channel mode stays last.
struct TensorizationPlan {
    Shape source_shape;               // (H, W, C)
    Shape stage1_shape;               // (2,...,2, C), 2k spatial modes
    std::vector<index_t> perm;        // interleaving {1, k+1, 2, k+2, ..., k, 2k, 2k+1}
    Shape stage2_shape;               // (4,...,4, C), k spatial modes
    index_t levels = 0;               // k with H = W = 2^k
};

/// Builds the plan for an h x w x c image; h and w must be equal powers of
/// two (no padding is performed).
TensorizationPlan make_plan(index_t h, index_t w, index_t c);

/// Image -> block tensor. Pure data movement, bit-exact.
DenseTensor tensorize(const DenseTensor& img, const TensorizationPlan& plan);

/// Exact inverse of tensorize.
DenseTensor detensorize(const DenseTensor& t, const TensorizationPlan& plan);

}  // namespace ttwopt
