#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "clcrc/errors.hpp"
#include "clcrc/market_model.hpp"
#include "generators.hpp"

using namespace clcrc;
using clcrc::test::elliptical;
using clcrc::test::quantile;

namespace {

constexpr UnixSeconds kDay = 1488758400;

OrderBookEntry order(const std::string& id, int hour, double mwh, double price, UnixSeconds from,
                     UnixSeconds to, Side side = Side::Buy) {
  return {id, side, kDay, hour, mwh, price, from, to};
}

UnixSeconds at(double hours) { return kDay + static_cast<UnixSeconds>(hours * 3600.0); }

double spearman(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::MatrixXd m(a.size(), 2);
  m.col(0) = a;
  m.col(1) = b;
  const Eigen::MatrixXd u = pseudo_observations(m);
  const Eigen::VectorXd x = u.col(0).array() - u.col(0).mean(), y = u.col(1).array() - u.col(1).mean();
  return x.dot(y) / std::sqrt(x.squaredNorm() * y.squaredNorm());
}

}  // namespace

TEST_CASE("lifetime filter keeps exactly fifteen minutes") {
  const std::vector<OrderBookEntry> in = {order("a", 18, 1, 0, at(10), at(10) + 14 * 60),
                                          order("b", 18, 2, 0, at(10), at(10) + 15 * 60)};
  const auto out = filter_orders(in);
  REQUIRE(out.size() == 1);
  CHECK(out[0].order_id == "b");
}

TEST_CASE("identical resubmissions keep only the first order") {
  const std::vector<OrderBookEntry> in = {order("first", 18, 1, 5, at(8), at(9)),
                                          order("again", 18, 1, 5, at(9.5), at(11)),
                                          order("other", 18, 1, 6, at(9.5), at(11))};
  const auto out = filter_orders(in);
  REQUIRE(out.size() == 2);
  CHECK(out[0].order_id == "first");
  CHECK(out[1].order_id == "other");
  CHECK(filter_orders(out).size() == out.size());
  CHECK(filter_orders(std::vector<OrderBookEntry>{}).empty());
}

TEST_CASE("window aggregate volume and VWAP") {
  const std::vector<OrderBookEntry> in = {order("a", 18, 2, 10, at(9), at(17)),
                                          order("b", 18, 3, -5, at(13), at(17.25)),
                                          order("gone", 18, 7, 50, at(8), at(11.5)),
                                          order("sell", 18, 4, 60, at(9), at(17), Side::Sell)};
  const WindowAggregate w = window_aggregate(in, at(12), at(18));
  CHECK(w.volume == doctest::Approx(5.0));
  REQUIRE(w.vwap);
  CHECK(*w.vwap == doctest::Approx(1.0));
  CHECK_FALSE(w.window_closed);

  const WindowAggregate none = window_aggregate({}, at(12), at(18));
  CHECK(none.volume == 0.0);
  CHECK_FALSE(none.vwap);

  const WindowAggregate closed = window_aggregate(in, at(17.25), at(18));
  CHECK(closed.window_closed);
  CHECK(closed.volume == 0.0);
  CHECK(kGateClosureLead == 45 * 60);
}

TEST_CASE("window volume shrinks as the window opens later") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 17.0);
  std::vector<OrderBookEntry> in;
  for (int i = 0; i < 200; ++i) {
    const double a = u(rng), b = a + 0.25 + u(rng) / 4;
    in.push_back(order("o" + std::to_string(i), 18, 0.1 * (1 + i % 5), 0, at(a), at(b)));
  }
  double prev = 1e300;
  for (double start = 0; start < 17.25; start += 0.5) {
    const double v = window_aggregate(in, at(start), at(18)).volume;
    CHECK(v <= prev + 1e-12);
    prev = v;
  }
}

TEST_CASE("order book CSV round trip counts malformed rows") {
  const std::vector<OrderBookEntry> in = {order("a", 18, 2, -10.5, at(9), at(17))};
  std::stringstream ss;
  write_order_book_csv(ss, in);
  ss << "broken,row\n";
  const OrderBookReadResult r = read_order_book_csv(ss);
  REQUIRE(r.orders.size() == 1);
  CHECK(r.malformed_rows == 1);
  CHECK(r.orders[0].limit_price == doctest::Approx(-10.5));
  CHECK(r.orders[0].closed_at == at(17));
}

TEST_CASE("independent gaussian data selects the gaussian copula with identity correlation") {
  const auto data = elliptical(1000, 4, 0.0, 0.0, 1);
  const CopulaModel m = fit_copula(data);
  CHECK(m.family == CopulaFamily::Gaussian);
  CHECK((m.correlation - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("heavy tailed dependent data selects the student-t copula") {
  const auto data = elliptical(1000, 4, 0.8, 4.0, 2);
  const CopulaModel m = fit_copula(data);
  CHECK(m.family == CopulaFamily::StudentT);
  CHECK(m.degrees_of_freedom > 2.0);
  CHECK(m.degrees_of_freedom < 10.0);
}

TEST_CASE("identical columns are perfectly correlated and constant columns inactive") {
  auto data = elliptical(200, 2, 0.0, 0.0, 3);
  for (auto& r : data) {
    r.push_back(r[0]);
    r.push_back(4.0);
  }
  const CopulaModel m = fit_copula(data);
  REQUIRE(m.active.size() == 3);
  CHECK(m.correlation(0, 2) >= 0.99);
  const Eigen::MatrixXd s = sample_market(m, 10, 5);
  for (Eigen::Index r = 0; r < s.rows(); ++r) CHECK(s(r, 3) == 4.0);
}

TEST_CASE("copula fit needs fifty sample days") {
  const auto data = elliptical(49, 2, 0.0, 0.0, 4);
  CHECK_THROWS_AS(fit_copula(data), UsageError);
}

TEST_CASE("sampled quartiles match the data") {
  const auto data = elliptical(400, 4, 0.5, 5.0, 6);
  const CopulaModel m = fit_copula(data);
  const Eigen::MatrixXd s = sample_market(m, 10000, 7);
  for (std::size_t c = 0; c < 4; ++c) {
    std::vector<double> col, drawn(s.col(static_cast<Eigen::Index>(c)).data(),
                                   s.col(static_cast<Eigen::Index>(c)).data() + s.rows());
    for (const auto& r : data) col.push_back(r[c]);
    const double iqr = quantile(col, 0.75) - quantile(col, 0.25);
    CHECK(std::abs(quantile(drawn, 0.25) - quantile(col, 0.25)) <= 0.05 * iqr);
    CHECK(std::abs(quantile(drawn, 0.75) - quantile(col, 0.75)) <= 0.05 * iqr);
  }
}

TEST_CASE("identity gaussian samples are uncorrelated, seeded and volumes nonnegative") {
  CopulaModel m = fit_copula(elliptical(500, 2, 0.0, 0.0, 8));
  m.family = CopulaFamily::Gaussian;
  m.correlation = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd s = sample_market(m, 10000, 9);
  CHECK(std::abs(spearman(s.col(0), s.col(1))) < 0.03);
  for (double& v : m.marginal_sorted[1]) v += 20.0;
  const Eigen::MatrixXd clamped = sample_market(m, 1000, 9, 2);
  CHECK(clamped.minCoeff() >= 0.0);
  CHECK(clamped.col(1).maxCoeff() > 0.0);
  CHECK((clamped.col(1).array() == 0.0).count() > 100);
  CHECK(sample_market(m, 1, 10) == sample_market(m, 1, 10));
}

TEST_CASE("copula model round-trips through JSON") {
  const CopulaModel m = fit_copula(elliptical(100, 3, 0.3, 0.0, 12));
  const CopulaModel back = CopulaModel::from_json(m.to_json());
  CHECK(sample_market(back, 5, 1) == sample_market(m, 5, 1));
}

TEST_CASE("fast-forward reduction on three points") {
  Eigen::MatrixXd x(3, 1);
  x << 0, 1, 10;
  const ReductionResult one = fast_forward_reduce(x, 1, DistanceMetric::Euclidean);
  REQUIRE(one.selected.size() == 1);
  CHECK(one.selected[0] == 1);
  CHECK(one.probability[0] == doctest::Approx(1.0));
  CHECK(one.kantorovich_distance == doctest::Approx(10.0 / 3.0));

  const ReductionResult two = fast_forward_reduce(x, 2, DistanceMetric::Euclidean);
  CHECK(two.selected == std::vector<std::size_t>{1, 2});
  double best = 1e300;
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = a + 1; b < 3; ++b) {
      const std::vector<std::size_t> kept = {a, b};
      best = std::min(best, kantorovich_distance(x, kept, DistanceMetric::Euclidean));
    }
  CHECK(two.kantorovich_distance == doctest::Approx(best));

  const ReductionResult all = fast_forward_reduce(x, 3, DistanceMetric::Euclidean);
  for (double p : all.probability) CHECK(p == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(fast_forward_reduce(x, 4), UsageError);
}

TEST_CASE("reduction distance shrinks with more scenarios and probabilities sum to one") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> z;
  Eigen::MatrixXd x(60, 6);
  for (Eigen::Index r = 0; r < 60; ++r)
    for (Eigen::Index c = 0; c < 6; ++c) x(r, c) = z(rng) * (c + 1);
  double prev = 1e300;
  for (std::size_t m = 1; m <= 60; m += 7) {
    const ReductionResult r = fast_forward_reduce(x, m);
    double sum = 0.0;
    for (double p : r.probability) {
      CHECK(p >= 0.0);
      sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.kantorovich_distance <= prev + 1e-12);
    prev = r.kantorovich_distance;
  }
  const auto scen = reduce_scenarios(x, 4);
  REQUIRE(scen.size() == 4);
  CHECK(scen[0].buy_volume.size() == 3);
}

TEST_CASE("missing prices take the column median") {
  const double nan = std::nan("");
  std::vector<std::vector<double>> rows = {{1, 5}, {0, nan}, {2, 7}, {1, 9}};
  impute_missing_prices(rows, 1);
  CHECK(rows[1][1] == doctest::Approx(7.0));
  CHECK(rows[1][0] == 0.0);
}
