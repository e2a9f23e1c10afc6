#include "invkit/transforms.hpp"

#include <array>

namespace invkit {

namespace {

// Pixel (a, b) goes to M·(a, b) + t, reduced mod (H, W). M is a signed
// permutation, so every element is an exact affine permutation of the grid.
struct Affine {
  std::array<Index, 4> m{1, 0, 0, 1};
  std::array<Index, 2> t{0, 0};
};

Index wrap(Index v, Index n) { return ((v % n) + n) % n; }

Affine then(const Affine& outer, const Affine& inner, Index h, Index w) {
  Affine r;
  const auto& a = outer.m;
  const auto& b = inner.m;
  r.m = {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
         a[2] * b[1] + a[3] * b[3]};
  r.t = {wrap(a[0] * inner.t[0] + a[1] * inner.t[1] + outer.t[0], h),
         wrap(a[2] * inner.t[0] + a[3] * inner.t[1] + outer.t[1], w)};
  return r;
}

Affine to_affine(const GroupElement& g, Index h, Index w) {
  const int k = wrap(g.rot, 4);
  if (k % 2 == 1 && h != w)
    throw ShapeError("rot90 with odd k needs a square image, got " + std::to_string(h) + "×" + std::to_string(w));
  Affine r;
  const Affine quarter{{0, -1, 1, 0}, {h - 1, 0}}; // (a, b) ↦ (N−1−b, a)
  for (int i = 0; i < k; ++i) r = then(quarter, r, h, w);
  if (g.flip == Flip::V) r = then(Affine{{-1, 0, 0, 1}, {h - 1, 0}}, r, h, w);
  if (g.flip == Flip::H) r = then(Affine{{1, 0, 0, -1}, {0, w - 1}}, r, h, w);
  return then(Affine{{1, 0, 0, 1}, {wrap(g.dy, h), wrap(g.dx, w)}}, r, h, w);
}

GroupElement from_affine(const Affine& target, Index h, Index w) {
  for (int k = 0; k < 4; ++k) {
    if (k % 2 == 1 && h != w) continue;
    for (Flip f : {Flip::None, Flip::V}) {
      const Affine base = to_affine({k, f, 0, 0}, h, w);
      if (base.m == target.m)
        return {k, f, wrap(target.t[0] - base.t[0], h), wrap(target.t[1] - base.t[1], w)};
    }
  }
  throw ShapeError("transform is not representable on this image");
}

} // namespace

std::string to_string(const GroupElement& g) {
  const char* flip = g.flip == Flip::None ? "none" : g.flip == Flip::H ? "h" : "v";
  return "rot" + std::to_string(g.rot) + "/flip-" + flip + "/shift(" + std::to_string(g.dy) + "," +
         std::to_string(g.dx) + ")";
}

Tensor apply_transform(const GroupElement& g, const Tensor& x) {
  const Index h = x.height(), w = x.width();
  const Affine a = to_affine(g, h, w);
  Tensor out(x.shape(), x.dtype());
  for (Index p = 0; p < x.planes(); ++p) {
    auto src = x.plane(p);
    auto dst = out.plane(p);
    for (Index i = 0; i < h; ++i)
      for (Index j = 0; j < w; ++j)
        dst(wrap(a.m[0] * i + a.m[1] * j + a.t[0], h), wrap(a.m[2] * i + a.m[3] * j + a.t[1], w)) = src(i, j);
  }
  return out;
}

GroupElement invert(const GroupElement& g, Index h, Index w) {
  const Affine a = to_affine(g, h, w);
  Affine inv;
  inv.m = {a.m[0], a.m[2], a.m[1], a.m[3]}; // signed permutation: inverse = transpose
  inv.t = {wrap(-(inv.m[0] * a.t[0] + inv.m[1] * a.t[1]), h), wrap(-(inv.m[2] * a.t[0] + inv.m[3] * a.t[1]), w)};
  return from_affine(inv, h, w);
}

GroupElement compose(const GroupElement& a, const GroupElement& b, Index h, Index w) {
  return from_affine(then(to_affine(a, h, w), to_affine(b, h, w), h, w), h, w);
}

GroupElement canonical(const GroupElement& g, Index h, Index w) { return from_affine(to_affine(g, h, w), h, w); }

TransformKinds transform_kinds_from_names(const std::vector<std::string>& names) {
  TransformKinds k;
  for (const auto& n : names) {
    if (n == "shift")
      k.shift = true;
    else if (n == "rot90")
      k.rot90 = true;
    else if (n == "flip")
      k.flip = true;
    else
      throw ConfigError("unknown transform kind '" + n + "' (expected shift, rot90 or flip)");
  }
  return k;
}

GroupElement random_element(RngState& rng, TransformKinds kinds, Index h, Index w) {
  if (!kinds.shift && !kinds.rot90 && !kinds.flip) throw ValidationError("random_element: no transform kind enabled");
  if (h < 1 || w < 1) throw ValidationError("random_element: empty image");
  GroupElement g;
  if (kinds.rot90) g.rot = h == w ? static_cast<int>(rng.uniform_int(4)) : 2 * static_cast<int>(rng.uniform_int(2));
  if (kinds.flip) g.flip = static_cast<Flip>(rng.uniform_int(3));
  if (kinds.shift) {
    g.dy = static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(h)));
    g.dx = static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(w)));
  }
  return g;
}

} // namespace invkit
