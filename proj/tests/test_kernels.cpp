#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "eprlab/kernels.hpp"
#include "eprlab/rng.hpp"

using namespace eprlab;

namespace {

std::vector<double> random_vec(std::size_t n, double lo, double hi,
                               std::uint64_t seed) {
  rng::Stream s(seed);
  std::vector<double> v(n);
  for (double& x : v) x = lo + (hi - lo) * s.next_unit();
  return v;
}

}  // namespace

TEST_CASE("backend roster") {
  const auto backends = kernels::available();
  REQUIRE(!backends.empty());
  CHECK(std::string(backends.front()->name) == "scalar");
  bool active_listed = false;
  for (const auto* b : backends)
    if (b == &kernels::active()) active_listed = true;
  CHECK(active_listed);
}

TEST_CASE("vexp matches libm on every backend") {
  const auto xs = random_vec(1037, -700.0, 5.0, 11);
  std::vector<double> out(xs.size());
  for (const auto* b : kernels::available()) {
    CAPTURE(b->name);
    b->vexp(xs.data(), out.data(), xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double ref = std::exp(xs[i]);
      CHECK(std::abs(out[i] - ref) <= 1e-13 * ref);
    }
  }
}

TEST_CASE("gaussian kernel evaluation matches the scalar formula") {
  const auto xs = random_vec(513, -30.0, 30.0, 12);
  std::vector<double> out(xs.size());
  for (const auto* b : kernels::available()) {
    CAPTURE(b->name);
    b->gaussian(xs.data(), out.data(), xs.size(), 1.25, -0.37);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double t = xs[i] - 1.25;
      const double ref = std::exp(-0.37 * t * t);
      CHECK(std::abs(out[i] - ref) <= 1e-13 * std::max(ref, 1e-300));
    }
  }
}

TEST_CASE("convolution agrees across backends and handles edges") {
  const auto src = random_vec(257, -1.0, 2.0, 13);
  for (std::size_t taps : {std::size_t{1}, std::size_t{3}, std::size_t{31},
                           std::size_t{101}, std::size_t{513}}) {
    auto kernel = random_vec(taps, 0.0, 1.0, 14 + taps);
    std::vector<double> ref(src.size()), got(src.size());
    kernels::scalar().convolve_same(src.data(), src.size(), kernel.data(),
                                    kernel.size(), ref.data());
    for (const auto* b : kernels::available()) {
      CAPTURE(b->name);
      CAPTURE(taps);
      b->convolve_same(src.data(), src.size(), kernel.data(), kernel.size(),
                       got.data());
      for (std::size_t i = 0; i < src.size(); ++i)
        CHECK(std::abs(got[i] - ref[i]) <= 1e-12);
    }
  }
}

TEST_CASE("identity kernel convolution is exact") {
  const auto src = random_vec(100, -5.0, 5.0, 15);
  const double one = 1.0;
  std::vector<double> out(src.size());
  for (const auto* b : kernels::available()) {
    b->convolve_same(src.data(), src.size(), &one, 1, out.data());
    CHECK(out == src);
  }
}

TEST_CASE("unit-sum kernels preserve the mass of interior signals") {
  // signal vanishing near the edges: zero padding loses nothing
  std::vector<double> src(2001, 0.0);
  for (int i = 0; i < 2001; ++i) {
    const double t = (i - 1000) / 120.0;
    src[i] = std::exp(-t * t);
  }
  auto kernel = random_vec(61, 0.0, 1.0, 16);
  double ksum = 0.0;
  for (double k : kernel) ksum += k;
  for (double& k : kernel) k /= ksum;

  std::vector<double> out(src.size());
  kernels::convolve_same(src.data(), src.size(), kernel.data(), kernel.size(),
                         out.data());
  const double before = kernels::sum(src.data(), src.size());
  const double after = kernels::sum(out.data(), out.size());
  CHECK(std::abs(after - before) <= 1e-9 * before);
}

TEST_CASE("weighted trig sums agree across backends") {
  const auto vals = random_vec(1001, -1.0, 1.0, 17);
  const auto xs = random_vec(1001, -7.0, 7.0, 18);
  double scale = 0.0;
  for (double v : vals) scale += std::abs(v);
  for (double freq : {0.0, 0.37, 4.2, 24.7, 190.0, -53.0}) {
    double c_ref = 0.0, s_ref = 0.0;
    kernels::scalar().weighted_trig_sum(vals.data(), xs.data(), vals.size(),
                                        freq, &c_ref, &s_ref);
    for (const auto* b : kernels::available()) {
      CAPTURE(b->name);
      CAPTURE(freq);
      double c = 0.0, s = 0.0;
      b->weighted_trig_sum(vals.data(), xs.data(), vals.size(), freq, &c, &s);
      CHECK(std::abs(c - c_ref) <= 1e-12 * scale);
      CHECK(std::abs(s - s_ref) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("reductions agree across backends") {
  const auto a = random_vec(777, -3.0, 3.0, 19);
  const auto b = random_vec(777, -3.0, 3.0, 20);
  const double dot_ref = kernels::scalar().dot(a.data(), b.data(), a.size());
  const double sum_ref = kernels::scalar().sum(a.data(), a.size());
  const double max_ref = kernels::scalar().max_value(a.data(), a.size());
  for (const auto* impl : kernels::available()) {
    CAPTURE(impl->name);
    CHECK(std::abs(impl->dot(a.data(), b.data(), a.size()) - dot_ref) <= 1e-11);
    CHECK(std::abs(impl->sum(a.data(), a.size()) - sum_ref) <= 1e-11);
    CHECK(impl->max_value(a.data(), a.size()) == max_ref);
  }
}

TEST_CASE("kernel calls are bit-reproducible") {
  const auto xs = random_vec(333, -50.0, 2.0, 21);
  std::vector<double> a(xs.size()), b(xs.size());
  kernels::vexp(xs.data(), a.data(), xs.size());
  kernels::vexp(xs.data(), b.data(), xs.size());
  CHECK(a == b);

  double c1 = 0.0, s1 = 0.0, c2 = 0.0, s2 = 0.0;
  kernels::weighted_trig_sum(xs.data(), xs.data(), xs.size(), 3.7, &c1, &s1);
  kernels::weighted_trig_sum(xs.data(), xs.data(), xs.size(), 3.7, &c2, &s2);
  CHECK(c1 == c2);
  CHECK(s1 == s2);
}
