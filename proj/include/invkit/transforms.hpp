#pragma once

#include <string>

#include "invkit/rng.hpp"
#include "invkit/tensor.hpp"

namespace invkit {

enum class Flip { None, H, V };

/// T_g = shift ∘ flip ∘ rot90^k acting on the two trailing axes.
///
/// rot90 turns counter-clockwise (numpy's rot90), flip H mirrors columns,
/// flip V mirrors rows, shift rolls circularly by (dy, dx).
struct GroupElement {
  int rot = 0;
  Flip flip = Flip::None;
  Index dy = 0;
  Index dx = 0;

  bool operator==(const GroupElement&) const = default;
};

std::string to_string(const GroupElement& g);

/// Exact pixel permutation; odd k on a non-square image is a ShapeError.
Tensor apply_transform(const GroupElement& g, const Tensor& x);

// Both results are in canonical form: rot ∈ {0..3}, flip ∈ {None, V}, shifts
// reduced mod (H, W). The image size is needed to reduce shifts.
GroupElement invert(const GroupElement& g, Index height, Index width);
/// Element acting as apply(a, apply(b, ·)).
GroupElement compose(const GroupElement& a, const GroupElement& b, Index height, Index width);
GroupElement canonical(const GroupElement& g, Index height, Index width);

struct TransformKinds {
  bool shift = false;
  bool rot90 = false;
  bool flip = false;
};

/// Parses "shift", "rot90" and "flip" names.
TransformKinds transform_kinds_from_names(const std::vector<std::string>& names);

/// Independent uniform draw per enabled kind: k ∈ {0..3} (only {0, 2} for
/// non-square images), flip ∈ {None, H, V}, shifts over the image size.
GroupElement random_element(RngState& rng, TransformKinds kinds, Index height, Index width);

} // namespace invkit
