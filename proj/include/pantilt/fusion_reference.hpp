#pragma once

#include "pantilt/fusion.hpp"

namespace pantilt::reference {

// Brute-force re-implementations of the fusion ops, written as plain scalar
// loops with no shared helpers, used by tests and the fusion-check command to
// cross-verify the primary implementations. Keep these deliberately naive.

Tensor conv1x1(const Tensor& x, const Conv1x1& k);
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t d_k);
Tensor mhsa(const Tensor& x, const MhsaConfig& cfg);
Tensor cfam_fuse(const Tensor& x0, const Tensor& x1, const Conv1x1& conv,
                 const MhsaConfig& cfg, const SpeedModulation& mod);

} // namespace pantilt::reference
