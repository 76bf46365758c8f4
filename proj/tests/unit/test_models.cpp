#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "permtest/models.hpp"
#include "permtest/stats.hpp"

using namespace permtest;
using Catch::Approx;

TEST_CASE("OLS interpolates exact linear data", "[models][ols]") {
  Matrix x(3, 1);
  x << 0, 1, 2;
  Vector y(3);
  y << 1, 3, 5;
  const FittedModel m = ols_fit(validate_dataset(x, y));
  REQUIRE(m.parameters.size() == 2);
  CHECK(m.parameters(0) == Approx(1.0).margin(1e-12));
  CHECK(m.parameters(1) == Approx(2.0).margin(1e-12));
}

TEST_CASE("OLS on a zero column resolves to the minimum-norm solution", "[models][ols]") {
  Matrix x = Matrix::Zero(3, 1);
  Vector y(3);
  y << 1, 2, 3;
  const FittedModel m = ols_fit(validate_dataset(x, y));
  CHECK(m.parameters(0) == Approx(2.0).margin(1e-12));
  CHECK(m.parameters(1) == Approx(0.0).margin(1e-12));
}

TEST_CASE("OLS rank-deficient design with duplicated column does not throw", "[models][ols]") {
  std::mt19937_64 gen(5);
  Matrix x = oracle::random_matrix(gen, 12, 2);
  x.col(1) = x.col(0);
  const Vector y = oracle::random_vector(gen, 12);
  const FittedModel m = ols_fit(x, y);
  CHECK(m.parameters.allFinite());
  // Minimum-norm splits the shared coefficient evenly.
  CHECK(m.parameters(1) == Approx(m.parameters(2)).margin(1e-10));
}

TEST_CASE("OLS matches the normal-equations oracle", "[models][ols][oracle]") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 25; ++trial) {
    const Matrix x = oracle::random_matrix(gen, 20, 3);
    const Vector y = oracle::random_vector(gen, 20);
    const Vector expected = oracle::normal_equations_ols(x, y);
    const Vector got = ols_fit(x, y).parameters;
    CHECK((got - expected).norm() / expected.norm() <= 1e-8);
  }
}

TEST_CASE("OLS predict evaluates the affine map", "[models][ols]") {
  FittedModel m;
  m.kind = ModelKind::Ols;
  m.input_dim = 1;
  m.parameters = Vector(2);
  m.parameters << 1, 2;
  Matrix x(1, 1);
  x << 3;
  CHECK(predict(m, x)(0) == Approx(7.0));
  CHECK_THROWS_AS(predict(m, Matrix::Ones(1, 2)), Error);
}

TEST_CASE("OLS residuals are orthogonal to every design column", "[models][ols]") {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = oracle::random_matrix(gen, 30, 4);
    const Vector y = oracle::random_vector(gen, 30);
    const Vector residual = y - predict(ols_fit(x, y), x);
    CHECK(std::abs(residual.sum()) <= 1e-8);
    for (Eigen::Index j = 0; j < x.cols(); ++j) CHECK(std::abs(x.col(j).dot(residual)) <= 1e-8);
  }
}

TEST_CASE("OLS training R^2 lies in [0, 1]", "[models][ols][property]") {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + trial % 40;
    const int d = 1 + trial % 3;
    const Matrix x = oracle::random_matrix(gen, n, d);
    const Vector y = oracle::random_vector(gen, n);
    const double r2 = r_squared(predict(ols_fit(x, y), x), y);
    CHECK(r2 >= -1e-12);
    CHECK(r2 <= 1.0);
  }
}

TEST_CASE("OLS coefficients are invariant under joint row permutation", "[models][ols][property]") {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix x = oracle::random_matrix(gen, 25, 3);
    const Vector y = oracle::random_vector(gen, 25);
    std::vector<int> order(25);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), gen);
    Matrix xp(25, 3);
    Vector yp(25);
    for (int i = 0; i < 25; ++i) {
      xp.row(i) = x.row(order[i]);
      yp(i) = y(order[i]);
    }
    CHECK((ols_fit(x, y).parameters - ols_fit(xp, yp).parameters).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("MLP training does not increase the loss on a zero target", "[models][mlp]") {
  std::mt19937_64 gen(1);
  const Matrix x = oracle::random_matrix(gen, 15, 2);
  const Vector y = Vector::Zero(15);
  const auto spec = RegressorSpec::mlp({8, 8}, 100, 0.01);
  const FittedModel m = mlp_fit(x, y, spec, RandomStream(42));
  CHECK(m.final_loss <= m.initial_loss);
}

TEST_CASE("MLP fit is deterministic given data, spec and seed", "[models][mlp]") {
  std::mt19937_64 gen(2);
  const Matrix x = oracle::random_matrix(gen, 20, 3);
  const Vector y = oracle::random_vector(gen, 20);
  const auto spec = RegressorSpec::mlp({10, 10}, 50, 0.05);
  const FittedModel a = mlp_fit(x, y, spec, RngPolicy(9).stream(3, "fit"));
  const FittedModel b = mlp_fit(x, y, spec, RngPolicy(9).stream(3, "fit"));
  CHECK(a.parameters == b.parameters);
  const FittedModel c = mlp_fit(x, y, spec, RngPolicy(9).stream(4, "fit"));
  CHECK(a.parameters != c.parameters);
}

TEST_CASE("MLP backprop gradient matches central finite differences", "[models][mlp][oracle]") {
  std::mt19937_64 gen(31);
  const mlp::Layout layout{2, {2, 2}};
  const Matrix x = oracle::random_matrix(gen, 5, 2);
  const Vector y = oracle::random_vector(gen, 5);
  RandomStream stream(77);
  Vector params = mlp::init_parameters(layout, stream);
  // Non-zero biases so every parameter is exercised.
  for (auto& p : params) p += 0.1 * stream.normal();

  Vector gradient;
  mlp::loss_and_gradient(layout, params, x, y, gradient);
  const Vector numeric = oracle::central_difference(
      [&](const Vector& p) { return mlp::loss(layout, p, x, y); }, params, 1e-5);
  CHECK(oracle::max_relative_error(gradient, numeric) <= 1e-4);
}

TEST_CASE("MLP with zero weights outputs its output bias", "[models][mlp]") {
  const mlp::Layout layout{3, {4, 4}};
  FittedModel m;
  m.kind = ModelKind::Mlp;
  m.input_dim = 3;
  m.hidden_layers = {4, 4};
  m.parameters = Vector::Zero(static_cast<Eigen::Index>(layout.parameter_count()));
  m.parameters(m.parameters.size() - 1) = 1.25;
  m.scaling.x_mean = Vector::Zero(3);
  m.scaling.x_scale = Vector::Ones(3);
  std::mt19937_64 gen(4);
  const Vector out = predict(m, oracle::random_matrix(gen, 6, 3));
  for (double v : out) CHECK(v == 1.25);
}

TEST_CASE("MLP divergence is reported", "[models][mlp]") {
  std::mt19937_64 gen(8);
  const Matrix x = oracle::random_matrix(gen, 30, 2);
  const Vector y = oracle::random_vector(gen, 30);
  const auto spec = RegressorSpec::mlp({30, 30, 30}, 500, 50.0);
  try {
    mlp_fit(x, y, spec, RandomStream(1));
    FAIL("expected DivergedTraining");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DivergedTraining);
  }
}

TEST_CASE("MLP training R^2 can be negative", "[models][mlp]") {
  // An essentially untrained net predicts scaled noise around the mean.
  std::mt19937_64 gen(12);
  const Matrix x = oracle::random_matrix(gen, 40, 2);
  const Vector y = oracle::random_vector(gen, 40);
  const auto spec = RegressorSpec::mlp({30, 30}, 1, 1e-9);
  const FittedModel m = mlp_fit(x, y, spec, RandomStream(5));
  CHECK(r_squared(predict(m, x), y) < 0.0);
}

TEST_CASE("RegressorSpec validation and naming", "[models]") {
  CHECK(RegressorSpec::ols().name() == "ols");
  CHECK(RegressorSpec::mlp().name() == "mlp(30,30,30)");
  CHECK_THROWS_AS(RegressorSpec::mlp({}, 10, 0.1).validate(), Error);
  CHECK_THROWS_AS(RegressorSpec::mlp({3, 0}, 10, 0.1).validate(), Error);
  CHECK_THROWS_AS(RegressorSpec::mlp({3}, 0, 0.1).validate(), Error);
  CHECK_THROWS_AS(RegressorSpec::mlp({3}, 10, 0.0).validate(), Error);
}
