#include <algorithm>
#include <cmath>
#include <numeric>

#include "../oracles.hpp"
#include "cnforecast/encoder.hpp"
#include "helpers.hpp"

using namespace cnf;

namespace {

SomModel model_1d(std::initializer_list<double> w) {
  Matrix m;
  for (double v : w) m.append_row(std::vector<double>{v});
  return SomModel(std::move(m));
}

std::vector<double> v1(double x) { return {x}; }

}  // namespace

TEST_CASE("similarity") {
  const std::vector<double> w{1, 2}, x{1, 2};
  CHECK(similarity(w, x, 3.0) == 0.0);
  const std::vector<double> a{0, 0}, b{0, 2};
  CHECK(similarity(a, b, 1.0) == -4.0);
  CHECK_ERROR_KIND(similarity(a, std::vector<double>{1}, 1.0), ErrorKind::contract);

  oracle::Gen gen(4);
  const auto nodes = gen.rows(10, 3);
  const auto q = gen.vec(3);
  std::vector<std::size_t> by_sim(10), by_dist(10);
  std::iota(by_sim.begin(), by_sim.end(), 0);
  std::iota(by_dist.begin(), by_dist.end(), 0);
  std::ranges::sort(by_sim, [&](auto i, auto j) { return similarity(nodes[i], q, 0.7) > similarity(nodes[j], q, 0.7); });
  std::ranges::sort(by_dist, [&](auto i, auto j) { return oracle::dist(nodes[i], q) < oracle::dist(nodes[j], q); });
  CHECK(by_sim == by_dist);
}

TEST_CASE("posterior") {
  // Equidistant nodes: uniform.
  const SomModel sym = model_1d({-2, 2, -2, 2});
  const Posterior u = posterior(sym, v1(0), 1.0);
  for (double p : u.probs) CHECK(p == doctest::Approx(0.25).epsilon(1e-15));

  const SomModel far = model_1d({0, 10, -10});
  CHECK(posterior(far, v1(0), 1.0).probs[0] > 0.999);

  const SomModel m = model_1d({0, 1, 2});
  const auto expect = oracle::softmax({-0.25, -0.25, -2.25});
  const Posterior p = posterior(m, v1(0.5), 1.0);
  for (std::size_t j = 0; j < 3; ++j) CHECK(p.probs[j] == doctest::Approx(expect[j]).epsilon(1e-12));

  CHECK_ERROR_KIND(posterior(m, std::vector<double>{1, 2}, 1.0), ErrorKind::contract);
}

TEST_CASE("encode_argmax") {
  const SomModel m = model_1d({0, 1, 2, 3, 4, 5, 6, 7, 8});
  CHECK(encode_argmax(m, v1(6), 1.0).value == 7.0);
  CHECK(encode_argmax(model_1d({0, 5, 10}), v1(6), 1.0).value == 2.0);

  oracle::Gen gen(12);
  const SomModel r(oracle::matrix_of(gen.rows(25, 4)));
  for (int rep = 0; rep < 1000; ++rep) {
    const auto x = gen.vec(4, -2, 2);
    CHECK(encode_argmax(r, x, gen.magnitude()).value == static_cast<double>(best_matching_unit(r, x)));
  }
}

TEST_CASE("encode_weighted") {
  oracle::Gen gen(13);
  const SomModel r(oracle::matrix_of(gen.rows(12, 3)));
  for (int rep = 0; rep < 100; ++rep) {
    const auto x = gen.vec(3);
    const EncodeConfig cfg{1, 2.0, EncodeMode::weighted};
    CHECK(encode_weighted(r, x, cfg).cn.value == encode_argmax(r, x, 2.0).value);
  }

  const SomModel m3 = model_1d({0, 10, 20});
  CHECK(encode_weighted(m3, v1(15), {2, 0.1, EncodeMode::weighted}).cn.value == doctest::Approx(2.5).epsilon(1e-15));

  // g=3 on a 5-node model near node 4.
  const SomModel m5 = model_1d({0, 1, 2, 3, 4});
  const double x = 3.1, beta = 1.0;
  std::vector<double> s;
  for (double w : {0.0, 1.0, 2.0, 3.0, 4.0}) s.push_back(-beta * (x - w) * (x - w));
  const auto p = oracle::softmax(s);
  // Highest three: nodes 4, 3, 5.
  const double expect = (p[3] * 4 + p[2] * 3 + p[4] * 5) / (p[3] + p[2] + p[4]);
  const auto got = encode_weighted(m5, v1(x), {3, beta, EncodeMode::weighted});
  CHECK(got.cn.value == doctest::Approx(expect).epsilon(1e-12));
  CHECK_FALSE(got.noncontiguous);

  // Bimodal posterior: nodes 1 and 3 tie, node 2 is far.
  const SomModel bi = model_1d({-1, 50, 1});
  const auto split = encode_weighted(bi, v1(0), {2, 1.0, EncodeMode::weighted});
  CHECK(split.noncontiguous);
  CHECK(split.cn.value == doctest::Approx(2.0));

  CHECK_ERROR_KIND(encode_weighted(m3, v1(1), {4, 1.0, EncodeMode::weighted}), ErrorKind::config);
  CHECK_ERROR_KIND(encode_weighted(m3, v1(1), {0, 1.0, EncodeMode::weighted}), ErrorKind::config);
  CHECK_ERROR_KIND(encode_weighted(m3, v1(1), {2, 0.0, EncodeMode::weighted}), ErrorKind::config);
}

TEST_CASE("encode_weighted stays within the selected index range") {
  oracle::Gen gen(14);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t K = gen.index(3, 20);
    const SomModel m(oracle::matrix_of(gen.rows(K, 2)));
    const std::size_t g = gen.index(1, K);
    const auto x = gen.vec(2);
    const double v = encode_weighted(m, x, {g, gen.magnitude(), EncodeMode::weighted}).cn.value;
    CHECK(v >= 1.0);
    CHECK(v <= static_cast<double>(K));
  }
}

TEST_CASE("encode_weighted depends on beta only when g > 1") {
  const SomModel m = model_1d({0, 1, 2, 3, 4});
  const auto x = v1(2.3);
  CHECK(encode_weighted(m, x, {1, 0.1, EncodeMode::weighted}).cn.value ==
        encode_weighted(m, x, {1, 10.0, EncodeMode::weighted}).cn.value);
  CHECK(encode_weighted(m, x, {3, 0.1, EncodeMode::weighted}).cn.value !=
        encode_weighted(m, x, {3, 10.0, EncodeMode::weighted}).cn.value);
}

TEST_CASE("decode") {
  const SomModel m(mat({{0, 0}, {2, 4}, {4, 0}, {8, 8}}));
  CHECK(decode(m, {3}) == std::vector<double>{4, 0});
  const auto mid = decode(m, {2.5});
  CHECK(mid[0] == 3.0);
  CHECK(mid[1] == 2.0);
  const auto q = decode(m, {2.25});
  CHECK(q[0] == doctest::Approx(0.75 * 2 + 0.25 * 4).epsilon(1e-15));
  CHECK(q[1] == doctest::Approx(0.75 * 4 + 0.25 * 0).epsilon(1e-15));
  CHECK(decode(m, {4}) == std::vector<double>{8, 8});
  CHECK(decode(m, {1}) == std::vector<double>{0, 0});
  CHECK_ERROR_KIND(decode(m, {0.999}), ErrorKind::range);
  CHECK_ERROR_KIND(decode(m, {4.001}), ErrorKind::range);
  CHECK_ERROR_KIND(decode(m, {std::nan("")}), ErrorKind::range);
}

TEST_CASE("decode inverts argmax encoding on distinct weights") {
  oracle::Gen gen(15);
  const SomModel m(oracle::matrix_of(gen.rows(30, 5)));
  for (std::size_t j = 1; j <= 30; ++j) {
    const auto cn = encode_argmax(m, m.weight(j), 1.0);
    CHECK(cn.value == static_cast<double>(j));
    CHECK(std::ranges::equal(decode(m, cn), m.weight(j)));
  }
}

TEST_CASE("p_max") {
  const SomModel far = model_1d({0, 20, -20, 40});
  CHECK(p_max(far, v1(0), 1.0) > 0.999);
  const SomModel sym = model_1d({-1, 1});
  CHECK(p_max(sym, v1(0), 5.0) == 0.5);
  const SomModel four = model_1d({-3, 3, -3, 3});
  CHECK(p_max(four, v1(0), 1.0) == 0.25);
}

TEST_CASE("default_beta") {
  // BMU squared distances {0.01, 0.04, 0.09} -> median 0.04.
  const SomModel m = model_1d({0, 10});
  const Dataset data = ds({{0.1}, {9.8}, {0.3}});
  CHECK(default_beta(m, data) == doctest::Approx(1.0 / (2 * 0.04)).epsilon(1e-12));
  // Median zero falls back to the mean.
  const Dataset mostly_exact = ds({{0}, {10}, {0.3}});
  CHECK(default_beta(m, mostly_exact) == doctest::Approx(1.0 / (2 * 0.03)).epsilon(1e-12));
  // All exact falls back to 1.
  CHECK(default_beta(m, ds({{0}, {10}})) == 1.0);
}

TEST_CASE("drift_monitor") {
  const std::vector<double> flat(20, 0.8);
  for (bool f : drift_monitor(flat, 0.9, 5, 0.8)) CHECK_FALSE(f);

  std::vector<double> drop(20, 0.8);
  for (std::size_t t = 10; t < 20; ++t) drop[t] = 0.0;
  const auto flags = drift_monitor(drop, 0.5, 4, 0.8);
  // Window mean first falls below 0.4 once at least 3 of its 4 entries are 0.
  for (std::size_t t = 0; t < 20; ++t) CHECK(flags[t] == (t >= 12));
  const auto full = drift_monitor(drop, 0.99, 4, 0.8);
  CHECK_FALSE(full[9]);
  CHECK(full[10]);

  oracle::Gen gen(16);
  std::vector<double> s;
  for (int t = 0; t < 60; ++t) s.push_back(t < 30 ? gen.uniform(0.6, 0.9) : gen.uniform(0.1, 0.5));
  CHECK(drift_monitor(s, 0.7, 6, 0.75) == oracle::rolling_flags(s, 0.7, 6, 0.75));
  const double prefix_mean = std::accumulate(s.begin(), s.begin() + 20, 0.0) / 20.0;
  CHECK(drift_monitor_with_prefix(s, 0.7, 6, 20) == oracle::rolling_flags(s, 0.7, 6, prefix_mean));

  CHECK_ERROR_KIND(drift_monitor(std::vector<double>{}, 0.5, 1, 1.0), ErrorKind::contract);
  CHECK_ERROR_KIND(drift_monitor(flat, 1.0, 1, 1.0), ErrorKind::contract);
  CHECK_ERROR_KIND(drift_monitor(flat, 0.5, 0, 1.0), ErrorKind::contract);
}

TEST_CASE("encode dispatches on mode") {
  const SomModel m = model_1d({0, 1, 2, 3});
  CHECK(encode(m, v1(1.4), {2, 1.0, EncodeMode::argmax}).value == 2.0);
  CHECK(encode(m, v1(1.4), {2, 1.0, EncodeMode::weighted}).value > 2.0);
  CHECK(parse_encode_mode("weighted") == EncodeMode::weighted);
  CHECK_ERROR_KIND(parse_encode_mode("soft"), ErrorKind::config);
}
