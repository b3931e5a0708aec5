#include <doctest.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "vlsynth/errors.hpp"
#include "vlsynth/image_qc.hpp"
#include "vlsynth/renderer.hpp"
#include "vlsynth/rng.hpp"

using namespace vlsynth;

namespace {

ImageGroup uniform_group(const ImageBuf& img) {
  ImageGroup g;
  g.group_id = "g";
  for (int s = 0; s < kGroupPanels; ++s) g.panel(s) = img;
  return g;
}

ImageGroup fixture_group(std::string_view text) {
  return render_group(parse_rule_program(text), StyleId::MonochromeVector, 42, RenderConfig{.panel_size = 128});
}

constexpr std::string_view kTurning =
    "layout seq5; entity triangle hollow medium; progress rotation_deg arithmetic 45 start 0;"
    "violate rotation_off; violate wrong_shape; violate wrong_fill;";

}  // namespace

TEST_CASE("hamming distance matches bit counting and obeys the metric laws") {
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    const auto a = rng.next(), b = rng.next(), c = rng.next();
    CHECK(hamming(a, b) == oracle::hamming_bits(a, b));
    CHECK(hamming(a, a) == 0);
    CHECK(hamming(a, b) == hamming(b, a));
    CHECK(hamming(a, c) <= hamming(a, b) + hamming(b, c));
  }
}

TEST_CASE("ssim against white: closed forms for constant images") {
  CHECK(std::abs(ssim_vs_white(ImageBuf(64, 64, kWhite)) - 1.0) <= 1e-9);
  CHECK(std::abs(ssim_vs_white(ImageBuf(64, 64, kBlack)) - oracle::ssim_constant_vs_white(0)) <= 1e-6);
  CHECK(std::abs(ssim_vs_white(ImageBuf(40, 24, Rgb{128, 128, 128})) - oracle::ssim_constant_vs_white(128)) <= 1e-6);
  CHECK_THROWS_AS(ssim_vs_white(ImageBuf(7, 64)), PreconditionError);
}

TEST_CASE("gradient energy of a step edge is 1 / width") {
  for (int w : {2, 5, 64, 101}) {
    for (int edge : {1, w / 2, w - 1}) {
      if (edge < 1) continue;
      CHECK(std::abs(gradient_energy(oracle::step_edge(w, 17, edge)) - 1.0 / w) <= 1e-9);
    }
  }
  CHECK(gradient_energy(ImageBuf(8, 8)) == 0.0);
  CHECK_THROWS_AS(gradient_energy(ImageBuf(1, 8)), PreconditionError);
}

TEST_CASE("ink fraction counts pixels below the cutoff") {
  CHECK(ink_fraction(oracle::step_edge(10, 10, 3)) == doctest::Approx(0.3));
  CHECK(ink_fraction(ImageBuf(10, 10)) == 0.0);
}

TEST_CASE("phash is stable, hex-layout independent of size and sensitive to content") {
  const auto g = fixture_group(kTurning);
  const auto h = phash(g.panel(0));
  CHECK(h == phash(g.panel(0)));
  CHECK(phash(ImageBuf(64, 64)) == phash(ImageBuf(128, 128)));
  CHECK(hamming(phash(g.panel(0)), phash(g.panel(2))) > 0);
}

TEST_CASE("identical panels are rejected as duplicates at threshold 10") {
  const auto g = uniform_group(fixture_group(kTurning).panel(1));
  const auto v = qc_group(g, QcThresholds{.dup = 10});
  CHECK_FALSE(v.accepted);
  int pairs = 0;
  for (const auto& r : v.reasons) {
    if (const auto* d = std::get_if<DuplicatePair>(&r)) {
      CHECK(d->distance == 0);
      CHECK(d->i < d->j);
      ++pairs;
    }
  }
  CHECK(pairs == kGroupPanels * (kGroupPanels - 1) / 2);
  CHECK(verdict_from_json(to_json(v)) == v);
}

TEST_CASE("blank and low-detail panels are rejected") {
  auto g = fixture_group(kTurning);
  CHECK(qc_group(g).accepted);

  auto blank = g;
  blank.panel(6) = ImageBuf(128, 128);
  const auto vb = qc_group(blank);
  CHECK_FALSE(vb.accepted);
  bool found = false;
  for (const auto& r : vb.reasons) found |= std::holds_alternative<Blank>(r) && std::get<Blank>(r).panel == 6;
  CHECK(found);

  // A flat gray panel is not near white, but carries no detail.
  auto flat = g;
  flat.panel(3) = ImageBuf(128, 128, Rgb{90, 90, 90});
  const auto vf = qc_group(flat);
  CHECK_FALSE(vf.accepted);
  found = false;
  for (const auto& r : vf.reasons) found |= std::holds_alternative<LowDetail>(r) && std::get<LowDetail>(r).panel == 3;
  CHECK(found);

  // The literal comparator flags a panel when its SSIM falls below the
  // threshold, i.e. when it looks unlike white.
  QcThresholds literal;
  literal.blank_mode = BlankMode::LiteralBelow;
  double score = 0;
  CHECK(is_blank(ImageBuf(64, 64, kBlack), literal, &score));
  CHECK(score == doctest::Approx(oracle::ssim_constant_vs_white(0)));
  CHECK_FALSE(is_blank(ImageBuf(64, 64), literal));
}

TEST_CASE("png round trip preserves pixels and encodes deterministically") {
  const auto g = render_group(parse_rule_program(kTurning), StyleId::FreePalette, 3, RenderConfig{.panel_size = 96});
  for (int s = 0; s < kGroupPanels; ++s) {
    const auto bytes = encode_png(g.panel(s));
    CHECK(bytes == encode_png(g.panel(s)));
    CHECK(decode_png(bytes) == g.panel(s));
  }
  const auto gray = fixture_group(kTurning).panel(0);
  CHECK(gray.is_grayscale());
  CHECK(decode_png(encode_png(gray)) == gray);
}
