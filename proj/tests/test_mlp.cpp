#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "robias/error.hpp"
#include "robias/mlp.hpp"
#include "robias/rng.hpp"

using namespace robias;

TEST(InitMlp, ShapesAndDeterminism) {
  const auto m = init_mlp({{5, 20, 2}, 3});
  ASSERT_EQ(m.layers().size(), 2u);
  EXPECT_EQ(m.layers()[0].weights.rows(), 20);
  EXPECT_EQ(m.layers()[0].weights.cols(), 5);
  EXPECT_EQ(m.layers()[1].weights.rows(), 2);
  EXPECT_EQ(m.layers()[1].weights.cols(), 20);
  EXPECT_EQ(mlp_to_json(m), mlp_to_json(init_mlp({{5, 20, 2}, 3})));
  EXPECT_EQ(init_mlp({{4, 15, 15, 3}, 1}).layers().size(), 3u);
}

TEST(InitMlp, GlorotRangeZeroBias) {
  const auto m = init_mlp({{4, 15, 15, 3}, 9});
  for (const auto& l : m.layers()) {
    const double limit = std::sqrt(6.0 / static_cast<double>(l.weights.rows() + l.weights.cols()));
    EXPECT_LE(l.weights.cwiseAbs().maxCoeff(), limit);
    EXPECT_EQ(l.bias.cwiseAbs().maxCoeff(), 0.0);
  }
  EXPECT_THROW(init_mlp({{4, 3}, 1}), ArgumentError);
}

TEST(Predict, ZeroNetIsUniform) {
  auto m = init_mlp({{3, 4, 3}, 1});
  for (auto& l : m.mutable_layers()) l.weights.setZero();
  const auto p = m.predict(Vector::Constant(3, 2.0));
  EXPECT_EQ(p.label, 0);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(p.probabilities(i), 1.0 / 3.0, 1e-12);
  EXPECT_EQ(m.input_gradient(Vector::Constant(3, 2.0), 1), Vector::Zero(3));
}

TEST(Predict, HandBuiltNet) {
  DenseLayer hidden{Matrix::Identity(2, 2), Vector::Zero(2)};
  DenseLayer out{Matrix::Identity(2, 2), Vector::Zero(2)};
  const Mlp m({hidden, out});
  Vector x(2);
  x << 0.2, 0.9;
  EXPECT_EQ(m.predict(x).label, 1);
  EXPECT_EQ(m.classify(x), 1);
  EXPECT_THROW(m.predict(Vector::Zero(3)), ArgumentError);
}

TEST(Predict, ProbabilitiesSumToOne) {
  const auto m = init_mlp({{4, 8, 5}, 2});
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    Vector x(4);
    for (int j = 0; j < 4; ++j) x(j) = rng.uniform(-10, 10);
    EXPECT_NEAR(m.predict(x).probabilities.sum(), 1.0, 1e-9);
  }
}

TEST(InputGradient, MatchesFiniteDifferences) {
  Rng rng(4);
  for (int f = 0; f < 20; ++f) {
    const std::size_t d = 2 + rng.index(5);
    const std::size_t h = 3 + rng.index(8);
    const std::size_t L = 2 + rng.index(3);
    auto m = init_mlp({{d, h, h, L}, static_cast<std::uint64_t>(f)});
    for (auto& l : m.mutable_layers())
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = rng.uniform(-0.5, 0.5);
    Vector x(static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) x(static_cast<Eigen::Index>(j)) = rng.uniform(-2, 2);
    const int cls = static_cast<int>(rng.index(L));
    const Vector g = m.input_gradient(x, cls);
    EXPECT_EQ(g.size(), static_cast<Eigen::Index>(d));
    EXPECT_LT(oracle::relative_error(g, oracle::finite_difference_gradient(m, x, cls)), 1e-4);
  }
}

TEST(LossGradients, MatchFiniteDifferences) {
  const auto data = make_toy_blobs(6, {Vector::Zero(3), Vector::Constant(3, 1.0)}, 0.8, 2);
  auto m = init_mlp({{3, 5, 2}, 7});
  std::vector<DenseLayer> grads;
  m.loss_and_gradients(data.features(), data.labels(), grads);
  const double h = 1e-6;
  for (std::size_t l = 0; l < m.layers().size(); ++l) {
    for (Eigen::Index i = 0; i < m.layers()[l].weights.size(); ++i) {
      auto up = m, down = m;
      up.mutable_layers()[l].weights.data()[i] += h;
      down.mutable_layers()[l].weights.data()[i] -= h;
      const double fd = (up.loss(data.features(), data.labels()) -
                         down.loss(data.features(), data.labels())) / (2 * h);
      EXPECT_NEAR(grads[l].weights.data()[i], fd, 1e-6);
    }
  }
}

TEST(Train, SeparatesToyBlobs) {
  const auto data = make_toy_blobs(30, {Vector::Zero(2), Vector::Constant(2, 6.0)}, 1.0, 5);
  const auto result = train(init_mlp({{2, 8, 2}, 1}), data, {{{0.1, 200}}, 0.0}, 1);
  EXPECT_DOUBLE_EQ(result.report.train_accuracy, 1.0);
  EXPECT_EQ(result.report.losses.size(), 200u);
  for (double l : result.report.losses) EXPECT_TRUE(std::isfinite(l));
}

TEST(Train, DeterministicAndValidationHoldout) {
  const auto data = make_toy_blobs(20, {Vector::Zero(2), Vector::Constant(2, 3.0)}, 1.0, 5);
  const TrainSchedule s{{{0.1, 30}, {0.05, 20}}, 0.25};
  const auto a = train(init_mlp({{2, 6, 2}, 1}), data, s, 9, &data);
  const auto b = train(init_mlp({{2, 6, 2}, 1}), data, s, 9, &data);
  EXPECT_EQ(mlp_to_json(a.model), mlp_to_json(b.model));
  EXPECT_TRUE(a.report.validation_accuracy.has_value());
  EXPECT_TRUE(a.report.test_accuracy.has_value());
  EXPECT_EQ(a.report.losses.size(), 50u);
}

TEST(Train, ScheduleContract) {
  EXPECT_THROW((TrainSchedule{{{0.1, 0}}, 0.0}.validate()), ArgumentError);
  EXPECT_THROW((TrainSchedule{{}, 0.0}.validate()), ArgumentError);
  const TrainSchedule s{{{0.5, 40}, {0.2, 40}}, 0.0};
  EXPECT_EQ(s.total_epochs(), 80);
  EXPECT_EQ(s.scaled(0.5).total_epochs(), 40);
  EXPECT_EQ(s.scaled(0.001).total_epochs(), 2);
}

TEST(Train, DivergenceNamesEpoch) {
  const auto data = make_toy_blobs(10, {Vector::Zero(2), Vector::Constant(2, 1e150)}, 0.0, 1);
  try {
    train(init_mlp({{2, 4, 2}, 1}), data, {{{1e10, 5}}, 0.0}, 1);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(MlpJson, RoundTrip) {
  const auto m = init_mlp({{3, 4, 2}, 5});
  const auto path = oracle::temp_dir("mlp") / "m.json";
  save_mlp(m, path);
  const auto back = load_mlp(path);
  for (std::size_t l = 0; l < m.layers().size(); ++l) {
    EXPECT_EQ(back.layers()[l].weights, m.layers()[l].weights);
    EXPECT_EQ(back.layers()[l].bias, m.layers()[l].bias);
  }
}

TEST(Accuracy, EmptyThrows) {
  const auto m = init_mlp({{2, 3, 2}, 1});
  EXPECT_THROW(accuracy(m, Dataset()), ArgumentError);
}
