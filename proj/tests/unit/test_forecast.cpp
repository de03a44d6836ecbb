#include <algorithm>
#include <cmath>

#include "../oracles.hpp"
#include "cnforecast/data_io.hpp"
#include "cnforecast/forecast.hpp"
#include "helpers.hpp"

using namespace cnf;

namespace {

Dataset wave(std::size_t steps, double noise, std::uint64_t seed = 42) {
  return synth_traveling_wave(5, 6, steps, 0.01, noise, seed);
}

}  // namespace

TEST_CASE("lag_embed") {
  const std::vector<double> s{1, 2, 3, 4, 5};
  const LagMatrix lm = lag_embed(s, 2);
  CHECK(lm.regressors == mat({{2, 1}, {3, 2}, {4, 3}}));
  CHECK(lm.targets == std::vector<double>{3, 4, 5});
  CHECK_ERROR_KIND(lag_embed(s, 5), ErrorKind::insufficient_data);
  CHECK_ERROR_KIND(lag_embed(s, 0), ErrorKind::contract);

  oracle::Gen gen(30);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t T = gen.index(2, 60), d = gen.index(1, T - 1);
    const auto series = gen.vec(T);
    const LagMatrix m = lag_embed(series, d);
    CHECK(m.targets.size() == T - d);
    CHECK(m.regressors.rows() == T - d);
    // Chronology: the target of row t heads row t+1.
    for (std::size_t t = 0; t + 1 < m.targets.size(); ++t) CHECK(m.targets[t] == m.regressors(t + 1, 0));
    for (std::size_t t = 0; t < m.targets.size(); ++t)
      for (std::size_t i = 0; i < d; ++i) CHECK(m.regressors(t, i) == series[t + d - 1 - i]);
  }
}

TEST_CASE("fit_ar: noiseless recurrence") {
  // Starts far from the fixed point 4 so the early steps carry the slope.
  std::vector<double> s{-30.0};
  for (int t = 1; t < 200; ++t) s.push_back(0.5 * s.back() + 2.0);
  const ForecastModel m = fit_ar(s, 1);
  CHECK(m.coefficients[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(m.intercept == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("fit_ar matches a normal-equations oracle and has orthogonal residuals") {
  oracle::Gen gen(31);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t d = gen.index(1, 5), T = gen.index(d + 20, 200);
    std::vector<double> s;
    for (std::size_t t = 0; t < T; ++t) s.push_back(gen.uniform(1, 50));
    const ForecastModel m = fit_ar(s, d);
    CHECK_FALSE(m.ridge);
    const auto ref = oracle::ar_normal_equations(s, d);
    CHECK(m.intercept == doctest::Approx(ref[0]).epsilon(1e-8));
    for (std::size_t i = 0; i < d; ++i) CHECK(m.coefficients[i] == doctest::Approx(ref[i + 1]).epsilon(1e-8));

    const LagMatrix lm = lag_embed(s, d);
    double ynorm = 0.0;
    for (double y : lm.targets) ynorm += y * y;
    ynorm = std::sqrt(ynorm);
    std::vector<double> dots(d + 1, 0.0);
    for (std::size_t t = 0; t < lm.targets.size(); ++t) {
      const double r = lm.targets[t] - predict_raw(m, lm.regressors.row(t));
      dots[0] += r;
      for (std::size_t i = 0; i < d; ++i) dots[i + 1] += r * lm.regressors(t, i);
    }
    for (double v : dots) CHECK(std::abs(v) <= 1e-8 * ynorm * 50.0 * static_cast<double>(lm.targets.size()));
  }
}

TEST_CASE("fit_ar: constant series uses the ridge fallback") {
  const std::vector<double> s(50, 7.0);
  const ForecastModel m = fit_ar(s, 3);
  CHECK(m.ridge);
  const std::vector<double> recent{7, 7, 7};
  CHECK(predict_raw(m, recent) == doctest::Approx(7.0).epsilon(1e-9));
  CHECK(predict_next(m, recent, 10).value == doctest::Approx(7.0).epsilon(1e-9));
}

TEST_CASE("fit_ar needs more than d+1 values") {
  const std::vector<double> s{1, 2, 3};
  CHECK_ERROR_KIND(fit_ar(s, 2), ErrorKind::insufficient_data);
  CHECK_NOTHROW(fit_ar(std::vector<double>{1, 2, 4, 3}, 2));
}

TEST_CASE("predict_next") {
  const ForecastModel constant{5.0, {0.0, 0.0}, false};
  CHECK(predict_next(constant, std::vector<double>{3, 9}, 10).value == 5.0);
  const ForecastModel ident{0.0, {1.0}, false};
  CHECK(predict_next(ident, std::vector<double>{4.25}, 10).value == 4.25);

  oracle::Gen gen(32);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t d = gen.index(1, 8);
    ForecastModel m{gen.uniform(-3, 3), gen.vec(d), false};
    const auto recent = gen.vec(d, 0, 10);
    double ref = m.intercept;
    for (std::size_t i = 0; i < d; ++i) ref += m.coefficients[i] * recent[i];
    CHECK(predict_raw(m, recent) == doctest::Approx(ref).epsilon(1e-12));
  }

  const ForecastModel up{100.0, {1.0}, false};
  const Prediction hi = predict_next(up, std::vector<double>{1}, 20);
  CHECK(hi.value == 20.0);
  CHECK(hi.clamped);
  const Prediction lo = predict_next({-100.0, {1.0}, false}, std::vector<double>{1}, 20);
  CHECK(lo.value == 1.0);
  CHECK(lo.clamped);
  CHECK_ERROR_KIND(predict_next(ident, std::vector<double>{1, 2}, 5), ErrorKind::contract);
}

TEST_CASE("forecast_codes composes single steps") {
  oracle::Gen gen(33);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t d = gen.index(1, 4);
    const ForecastModel m{gen.uniform(0, 2), gen.vec(d, -0.6, 0.6), false};
    std::vector<double> codes = gen.vec(d, 1, 30);
    const auto three = forecast_codes(m, codes, 3, 30);
    for (int h = 0; h < 3; ++h) {
      const auto one = forecast_codes(m, codes, 1, 30);
      CHECK(one[0].value == three[static_cast<std::size_t>(h)].value);
      codes.push_back(one[0].value);
    }
  }
}

TEST_CASE("pipeline_train on the wave field beats persistence on its own training rows") {
  const auto [train, test] = split_prefix(wave(2000, 0.02), {1800});
  PipelineConfig cfg;
  cfg.nodes = 100;
  cfg.lag = 2;
  const CnPipeline p = pipeline_train(train, cfg);
  CHECK(p.nodes() == 100);
  CHECK(p.lag() == 2);
  CHECK(p.training_rows == 1800);
  CHECK(p.encode.beta > 0.0);
  CHECK(p.baseline_pmax > 0.0);
  CHECK(p.baseline_pmax <= 1.0);

  const Dataset rest = slice_rows(train, 2, train.size());
  const Matrix warm = slice_rows(train, 0, 2).matrix();
  const EvalReport own = evaluate(p, rest, warm);
  const EvalReport persist = persistence_baseline(rest, train.row(1));
  CHECK(own.mean_error < persist.mean_error);
}

TEST_CASE("pipeline_train errors and determinism") {
  const Dataset data = wave(60, 0.01);
  PipelineConfig cfg;
  cfg.nodes = 10;
  cfg.lag = 60;
  CHECK_ERROR_KIND(pipeline_train(data, cfg), ErrorKind::insufficient_data);
  cfg.lag = 59;
  CHECK_ERROR_KIND(pipeline_train(data, cfg), ErrorKind::insufficient_data);
  cfg.lag = 0;
  CHECK_ERROR_KIND(pipeline_train(data, cfg), ErrorKind::config);
  cfg.lag = 3;
  CHECK(pipeline_train(data, cfg) == pipeline_train(data, cfg));
  cfg.g = 50;
  cfg.mode = EncodeMode::weighted;
  CHECK(pipeline_train(data, cfg).encode.g == 10);
}

TEST_CASE("pipeline_forecast with an identity AR is quantized persistence") {
  const Dataset data = wave(300, 0.0);
  PipelineConfig cfg;
  cfg.nodes = 20;
  cfg.lag = 1;
  CnPipeline p = pipeline_train(data, cfg);
  p.forecaster = ForecastModel{0.0, {1.0}, false};
  Matrix recent;
  recent.append_row(data.row(123));
  const ForecastResult r = pipeline_forecast(p, recent, 1);
  CHECK(std::ranges::equal(r.predictions.row(0), pipeline_decode(p, pipeline_encode(p, data.row(123)))));
}

TEST_CASE("pipeline_forecast matches a hand trace on a 5-node map") {
  // 20 steps of a 2-dim loop.
  Matrix m;
  for (int t = 0; t < 20; ++t) {
    const double a = 0.3 * t;
    m.append_row(std::vector<double>{std::cos(a) * 3 + 1, std::sin(a) * 2 - 1});
  }
  const Dataset data(m);
  PipelineConfig cfg;
  cfg.nodes = 5;
  cfg.lag = 2;
  const CnPipeline p = pipeline_train(data, cfg);
  const auto w = oracle::rows_of(p.som.weights());

  auto to_z = [&](std::span<const double> x) {
    std::vector<double> z(2);
    for (int k = 0; k < 2; ++k) z[k] = (x[k] - p.norm.center[k]) / p.norm.scale[k];
    return z;
  };
  auto from_cn = [&](double cn) {
    const auto j = static_cast<std::size_t>(std::floor(cn));
    const double t = cn - static_cast<double>(j);
    std::vector<double> x(2);
    for (int k = 0; k < 2; ++k) {
      const double z = j == 5 ? w[4][k] : (1 - t) * w[j - 1][k] + t * w[j][k];
      x[k] = z * p.norm.scale[k] + p.norm.center[k];
    }
    return x;
  };

  Matrix recent;
  recent.append_row(data.row(18));
  recent.append_row(data.row(19));
  std::vector<double> codes{static_cast<double>(oracle::nearest(w, to_z(data.row(18)))),
                            static_cast<double>(oracle::nearest(w, to_z(data.row(19))))};
  const ForecastResult r = pipeline_forecast(p, recent, 4);
  for (std::size_t h = 0; h < 4; ++h) {
    const std::size_t n = codes.size();
    double next = p.forecaster.intercept + p.forecaster.coefficients[0] * codes[n - 1] +
                  p.forecaster.coefficients[1] * codes[n - 2];
    next = std::clamp(next, 1.0, 5.0);
    codes.push_back(next);
    CHECK(r.contextual_numbers[h] == doctest::Approx(next).epsilon(1e-12));
    const auto x = from_cn(next);
    CHECK(r.predictions(h, 0) == doctest::Approx(x[0]).epsilon(1e-12));
    CHECK(r.predictions(h, 1) == doctest::Approx(x[1]).epsilon(1e-12));
  }
}

TEST_CASE("pipeline_forecast: multi-step equals chained steps in contextual-number space") {
  const Dataset data = wave(400, 0.02, 3);
  PipelineConfig cfg;
  cfg.nodes = 40;
  cfg.lag = 3;
  const CnPipeline p = pipeline_train(data, cfg);
  const Matrix recent = slice_rows(data, 397, 400).matrix();
  const ForecastResult three = pipeline_forecast(p, recent, 3);
  CHECK(three.predictions.rows() == 3);
  std::vector<double> codes;
  for (std::size_t i = 0; i < 3; ++i) codes.push_back(pipeline_encode(p, recent.row(i)).value);
  for (std::size_t h = 0; h < 3; ++h) {
    const auto one = forecast_codes(p.forecaster, codes, 1, p.nodes());
    CHECK(one[0].value == three.contextual_numbers[h]);
    CHECK(std::ranges::equal(three.predictions.row(h), pipeline_decode(p, {one[0].value})));
    codes.push_back(one[0].value);
  }
  CHECK_ERROR_KIND(pipeline_forecast(p, recent, 0), ErrorKind::contract);
  CHECK_ERROR_KIND(pipeline_forecast(p, slice_rows(data, 0, 2).matrix(), 1), ErrorKind::contract);
  CHECK_ERROR_KIND(pipeline_forecast(p, Matrix(3, 4), 1), ErrorKind::contract);
}

TEST_CASE("evaluate") {
  const auto [train, test] = split_prefix(wave(700, 0.02, 5), {600});
  PipelineConfig cfg;
  cfg.nodes = 60;
  cfg.lag = 2;
  const CnPipeline p = pipeline_train(train, cfg);
  const EvalReport r = evaluate(p, test, train.matrix());
  CHECK(r.per_step_errors.size() == 100);
  CHECK(r.p_max_series.size() == 100);
  CHECK(r.excluded == 0);
  CHECK(r.nodes == 60);
  CHECK(r.lag == 2);
  CHECK(r.beta == p.encode.beta);
  double sum = 0.0;
  for (double e : r.per_step_errors) sum += e;
  CHECK(r.mean_error == doctest::Approx(sum / 100).epsilon(1e-12));

  // Step 0 by hand: encode the last two training rows and predict.
  const double c1 = pipeline_encode(p, train.row(598)).value, c2 = pipeline_encode(p, train.row(599)).value;
  const auto pred = predict_next(p.forecaster, std::vector<double>{c2, c1}, p.nodes());
  CHECK(r.per_step_errors[0] == relative_error(pipeline_decode(p, {pred.value}), test.row(0)));
  CHECK(r.p_max_series[5] == pipeline_p_max(p, test.row(5)));

  const EvalReport free = evaluate(p, test, train.matrix(), EvalMode::free_running);
  const ForecastResult run = pipeline_forecast(p, slice_rows(train, 598, 600).matrix(), 100);
  for (std::size_t t = 0; t < 100; ++t)
    CHECK(free.per_step_errors[t] == relative_error(run.predictions.row(t), test.row(t)));

  CHECK_ERROR_KIND(evaluate(p, test, Matrix(1, 30)), ErrorKind::insufficient_data);
  CHECK_ERROR_KIND(evaluate(p, ds({{1, 2}}), train.matrix()), ErrorKind::contract);
}

TEST_CASE("evaluate on a constant process is exact") {
  Matrix m(40, 3);
  for (std::size_t i = 0; i < 40; ++i) {
    m(i, 0) = 1.0;
    m(i, 1) = -2.0;
    m(i, 2) = 0.5;
  }
  const Dataset data(m);
  PipelineConfig cfg;
  cfg.nodes = 30;
  cfg.lag = 2;
  const CnPipeline p = pipeline_train(data, cfg);
  const EvalReport r = evaluate(p, slice_rows(data, 30, 40), slice_rows(data, 0, 30).matrix());
  for (double e : r.per_step_errors) CHECK(e == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("evaluate excludes zero-norm rows and counts them") {
  Matrix m;
  for (int t = 0; t < 80; ++t) m.append_row(std::vector<double>{std::sin(0.2 * t), std::cos(0.2 * t)});
  const Dataset train(m);
  PipelineConfig cfg;
  cfg.nodes = 12;
  cfg.lag = 1;
  const CnPipeline p = pipeline_train(train, cfg);
  const Dataset test = ds({{1, 0}, {0, 0}, {0, 1}});
  const EvalReport r = evaluate(p, test, train.matrix());
  CHECK(r.excluded == 1);
  CHECK_FALSE(r.valid[1]);
  CHECK(r.per_step_errors[1] == 0.0);
  CHECK(r.mean_error == doctest::Approx((r.per_step_errors[0] + r.per_step_errors[2]) / 2).epsilon(1e-15));
  const EvalReport b = persistence_baseline(test, std::vector<double>{1, 0});
  CHECK(b.excluded == 1);
  CHECK(b.valid == r.valid);
  CHECK_ERROR_KIND(evaluate(p, ds({{0, 0}}), train.matrix()), ErrorKind::degenerate);
  CHECK_ERROR_KIND(persistence_baseline(ds({{0, 0}}), std::vector<double>{1, 0}), ErrorKind::degenerate);
}

TEST_CASE("persistence_baseline") {
  const Dataset constant = ds({{2, 3}, {2, 3}, {2, 3}});
  const EvalReport c = persistence_baseline(constant, std::vector<double>{2, 3});
  for (double e : c.per_step_errors) CHECK(e == 0.0);
  CHECK(c.mean_error == 0.0);
  CHECK(c.p_max_series.empty());

  const std::vector<double> a{3, 4}, b{5, 0};
  const Dataset alt = ds({{3, 4}, {5, 0}, {3, 4}, {5, 0}});
  const EvalReport r = persistence_baseline(alt, b);
  const double expect = oracle::dist({3, 4}, {5, 0}) / 5.0;
  for (double e : r.per_step_errors) CHECK(e == doctest::Approx(expect).epsilon(1e-15));
  CHECK_ERROR_KIND(persistence_baseline(alt, std::vector<double>{1}), ErrorKind::contract);
}

TEST_CASE("random_search: trial table and determinism") {
  const Dataset train = wave(500, 0.02, 8);
  SearchSpec spec;
  spec.draws = 6;
  spec.nodes_min = 10;
  spec.nodes_max = 30;
  spec.lag_min = 2;
  spec.lag_max = 5;
  PipelineConfig base;
  const SearchResult a = random_search(train, spec, base);
  CHECK(a.trials.size() == 6);
  for (const Trial& t : a.trials) {
    CHECK(t.nodes >= 10);
    CHECK(t.nodes <= 30);
    CHECK(t.lag >= 2);
    CHECK(t.lag <= 5);
    CHECK(t.ok);
    CHECK(a.trials[a.best_index].validation_error <= t.validation_error);
  }
  CHECK(a.best_nodes == a.trials[a.best_index].nodes);
  CHECK(a.best_lag == a.trials[a.best_index].lag);

  const SearchResult b = random_search(train, spec, base);
  CHECK(b.best_index == a.best_index);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(b.trials[i].nodes == a.trials[i].nodes);
    CHECK(b.trials[i].validation_error == a.trials[i].validation_error);
  }

  spec.threads = 3;
  const SearchResult c = random_search(train, spec, base);
  for (std::size_t i = 0; i < 6; ++i) CHECK(c.trials[i].validation_error == a.trials[i].validation_error);
}

TEST_CASE("random_search: tiny space agrees with exhaustive enumeration") {
  const Dataset train = wave(300, 0.03, 9);
  SearchSpec spec;
  spec.draws = 30;
  spec.nodes_min = 5;
  spec.nodes_max = 6;
  spec.lag_min = 2;
  spec.lag_max = 3;
  PipelineConfig base;
  const SearchResult r = random_search(train, spec, base);

  const std::size_t fit_rows = 240;
  const Dataset fit = slice_rows(train, 0, fit_rows), val = slice_rows(train, fit_rows, 300);
  double best = INFINITY;
  std::size_t best_k = 0, best_d = 0;
  for (std::size_t k : {5, 6})
    for (std::size_t d : {2, 3}) {
      PipelineConfig cfg = base;
      cfg.nodes = k;
      cfg.lag = d;
      const double e = evaluate(pipeline_train(fit, cfg), val, fit.matrix()).mean_error;
      if (e < best) {
        best = e;
        best_k = k;
        best_d = d;
      }
    }
  CHECK(r.best_nodes == best_k);
  CHECK(r.best_lag == best_d);
  CHECK(r.trials[r.best_index].validation_error == best);
}

TEST_CASE("random_search: failures") {
  const Dataset train = wave(40, 0.02);
  SearchSpec spec;
  spec.draws = 3;
  spec.nodes_min = 5;
  spec.nodes_max = 5;
  spec.lag_min = 40;
  spec.lag_max = 40;
  CHECK_ERROR_KIND(random_search(train, spec, {}), ErrorKind::numeric);
  spec.lag_min = 2;
  spec.lag_max = 40;
  spec.draws = 20;
  const SearchResult mixed = random_search(train, spec, {});
  bool some_failed = false;
  for (const Trial& t : mixed.trials) {
    if (!t.ok) {
      some_failed = true;
      CHECK_FALSE(t.message.empty());
    }
  }
  CHECK(some_failed);
  CHECK(mixed.trials[mixed.best_index].ok);

  spec.draws = 0;
  CHECK_ERROR_KIND(random_search(train, spec, {}), ErrorKind::config);
  spec.draws = 2;
  spec.nodes_min = 8;
  spec.nodes_max = 4;
  CHECK_ERROR_KIND(random_search(train, spec, {}), ErrorKind::config);
  spec.nodes_max = 9;
  spec.validation_fraction = 1.0;
  CHECK_ERROR_KIND(random_search(train, spec, {}), ErrorKind::config);
}
