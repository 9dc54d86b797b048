#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mlexp/error.hpp"
#include "mlexp/learn.hpp"
#include "mlexp/rng.hpp"
#include "test_support.hpp"

using namespace mlexp;

namespace {

Matrix points(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

ModelSpec knn(std::size_t k) { return {Algorithm::knn, KnnParams{k}, 0}; }

Labels argmax_rows(const Matrix& s) {
  Labels out;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < s.cols(); ++c) {
      if (s(i, c) > s(i, best)) best = c;
    }
    out.push_back(static_cast<int>(best));
  }
  return out;
}

}  // namespace

TEST(Knn, KOneReproducesTrainingLabels) {
  const auto ds = testing_support::blobs();
  const auto m = train(knn(1), ds.features, *ds.labels, 3);
  EXPECT_EQ(predict(m, ds.features), *ds.labels);
}

TEST(Knn, MajorityVote) {
  const auto x = points({{0}, {1}, {10}});
  const auto m = train(knn(3), x, {0, 0, 1}, 2);
  EXPECT_EQ(predict(m, points({{0.4}}))[0], 0);
}

TEST(Knn, VoteTieBrokenByDistanceThenClass) {
  const auto x = points({{0}, {3}});
  const auto m = train(knn(2), x, {1, 0}, 2);
  EXPECT_EQ(predict(m, points({{1}}))[0], 1);
  EXPECT_EQ(predict(m, points({{2}}))[0], 0);
  EXPECT_EQ(predict(m, points({{1.5}}))[0], 0);
}

TEST(Knn, VoteFractionScores) {
  const auto x = points({{0}, {1}, {2}, {3}, {50}});
  const auto m = train(knn(4), x, {0, 0, 0, 1, 1}, 2);
  const auto s = predict_scores(m, points({{0}}));
  EXPECT_DOUBLE_EQ(s(0, 0), 0.75);
  EXPECT_DOUBLE_EQ(s(0, 1), 0.25);
}

TEST(Knn, KEqualsNPredictsMajority) {
  const auto ds = testing_support::blobs();
  Labels y = *ds.labels;
  for (std::size_t i = 0; i < 10; ++i) y[i] = 1;
  std::map<int, int> c;
  for (int v : y) ++c[v];
  int majority = 0;
  for (auto [k, v] : c) {
    if (v > c[majority]) majority = k;
  }
  const auto m = train(knn(y.size()), ds.features, y, 3);
  for (int p : predict(m, ds.features)) EXPECT_EQ(p, majority);
}

TEST(Gnb, SymmetricQueryGivesHalf) {
  const auto m = train({Algorithm::gnb, GnbParams{}, 0}, points({{-1}, {-1.5}, {1}, {1.5}}), {0, 0, 1, 1}, 2);
  const auto s = predict_scores(m, points({{0}}));
  EXPECT_NEAR(s(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(s(0, 1), 0.5, 1e-12);
}

TEST(Gnb, PosteriorMatchesBruteForce) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n = 6 + static_cast<Eigen::Index>(rng.below(15)), d = 2;
    Matrix x(n, d);
    Labels y;
    for (Eigen::Index i = 0; i < n; ++i) {
      y.push_back(static_cast<int>(i % 3));
      for (Eigen::Index j = 0; j < d; ++j) x(i, j) = rng.uniform() * 2 + y.back();
    }
    const auto m = train({Algorithm::gnb, GnbParams{}, 0}, x, y, 3);
    // Brute force: per-class sample mean and population variance plus the epsilon.
    double maxvar = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double mu = x.col(j).mean();
      maxvar = std::max(maxvar, (x.col(j).array() - mu).square().mean());
    }
    const double eps = 1e-9 * maxvar;
    const auto q = points({{1.2, 0.7}});
    std::vector<double> logp(3);
    for (int c = 0; c < 3; ++c) {
      std::vector<Eigen::Index> rows;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (y[static_cast<std::size_t>(i)] == c) rows.push_back(i);
      }
      logp[c] = std::log(static_cast<double>(rows.size()) / static_cast<double>(n));
      for (Eigen::Index j = 0; j < d; ++j) {
        double mu = 0.0, var = 0.0;
        for (auto i : rows) mu += x(i, j);
        mu /= static_cast<double>(rows.size());
        for (auto i : rows) var += (x(i, j) - mu) * (x(i, j) - mu);
        var = var / static_cast<double>(rows.size()) + eps;
        logp[c] += -0.5 * std::log(2 * std::numbers::pi * var) - (q(0, j) - mu) * (q(0, j) - mu) / (2 * var);
      }
    }
    const double mx = *std::max_element(logp.begin(), logp.end());
    double z = 0.0;
    for (double v : logp) z += std::exp(v - mx);
    const auto s = predict_scores(m, q);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(s(0, c), std::exp(logp[c] - mx) / z, 1e-9);
  }
}

TEST(Tree, SingleLabelIsOneLeaf) {
  const auto m = train({Algorithm::tree, TreeParams{}, 0}, points({{1}, {2}, {3}}), {1, 1, 1}, 2);
  const auto& t = std::get<TreeModel>(m.state);
  EXPECT_EQ(t.nodes.size(), 1u);
  EXPECT_EQ(predict(m, points({{7}}))[0], 1);
}

TEST(Tree, LeafFrequencies) {
  const auto m = train({Algorithm::tree, TreeParams{10, 4}, 0}, points({{1}, {2}, {3}}), {0, 0, 1}, 2);
  const auto s = predict_scores(m, points({{2}}));
  EXPECT_NEAR(s(0, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(s(0, 1), 1.0 / 3.0, 1e-15);
}

TEST(Tree, MidpointSplitAndDepthLimit) {
  const auto x = points({{1, 0}, {2, 0}, {3, 0}, {4, 0}});
  const auto m = train({Algorithm::tree, TreeParams{}, 0}, x, {0, 0, 1, 1}, 2);
  const auto& t = std::get<TreeModel>(m.state);
  EXPECT_EQ(t.nodes[0].feature, 0);
  EXPECT_DOUBLE_EQ(t.nodes[0].threshold, 2.5);
  EXPECT_EQ(t.depth(), 1u);
  EXPECT_EQ(t.leaf_count(), 2u);
  const auto ds = testing_support::blobs();
  const auto deep = train({Algorithm::tree, TreeParams{2, 2}, 0}, ds.features, *ds.labels, 3);
  EXPECT_LE(std::get<TreeModel>(deep.state).depth(), 2u);
}

TEST(Logreg, SeparableFixtureReachesFullAccuracy) {
  const auto x = points({{0, 0}, {0, 1}, {3, 3}, {3, 4}});
  const Labels y{0, 0, 1, 1};
  const auto m = train({Algorithm::logreg, LogregParams{}, 0}, x, y, 2);
  EXPECT_EQ(predict(m, x), y);
}

TEST(Logreg, ZeroWeightsGiveUniform) {
  FittedModel m;
  m.algorithm = Algorithm::logreg;
  m.num_classes = 3;
  m.num_features = 2;
  m.state = LogregModel{Matrix::Zero(3, 2), Vector::Zero(3), 0, 0.0};
  const auto s = predict_scores(m, points({{0, 0}, {1, 5}, {-2, 2}}));
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    for (Eigen::Index c = 0; c < 3; ++c) EXPECT_NEAR(s(i, c), 1.0 / 3.0, 1e-15);
  }
}

TEST(Models, ScoresAreDistributionsAndPredictIsArgmax) {
  const auto ds = testing_support::blobs();
  const std::vector<ModelSpec> specs{knn(5), {Algorithm::gnb, GnbParams{}, 0}, {Algorithm::tree, TreeParams{}, 0},
                                     {Algorithm::logreg, LogregParams{0.1, 0.01, 300, 1e-6}, 0}};
  for (const auto& spec : specs) {
    const auto m = train(spec, ds.features, *ds.labels, 3);
    const auto s = predict_scores(m, ds.features);
    for (Eigen::Index i = 0; i < s.rows(); ++i) EXPECT_NEAR(s.row(i).sum(), 1.0, 1e-9);
    if (spec.algorithm != Algorithm::knn) EXPECT_EQ(predict(m, ds.features), argmax_rows(s));
    EXPECT_EQ(digest(m), digest(train(spec, ds.features, *ds.labels, 3)));
  }
}

TEST(Models, MissingClassInTrainingFold) {
  const auto m = train({Algorithm::gnb, GnbParams{}, 0}, points({{0}, {1}, {5}, {6}}), {0, 0, 2, 2}, 3);
  const auto s = predict_scores(m, points({{0.5}}));
  EXPECT_EQ(s.cols(), 3);
  EXPECT_EQ(s(0, 1), 0.0);
}

TEST(ModelSpec, JsonRoundTripAndValidation) {
  ModelSpec s{Algorithm::logreg, LogregParams{0.05, 0.1, 100, 1e-5}, 3};
  EXPECT_EQ(to_json(model_spec_from_json(to_json(s))), to_json(s));
  auto doc = to_json(knn(3));
  doc["hyperparameters"]["bogus"] = 1;
  EXPECT_THROW(model_spec_from_json(doc), Error);
  EXPECT_THROW((ModelSpec{Algorithm::knn, KnnParams{0}, 0}).check(), ValidationError);
  EXPECT_EQ(to_string(ModelSpec::defaults(Algorithm::dbscan).algorithm), "dbscan");
}

TEST(KMeans, KEqualsNIsZeroInertia) {
  const auto x = points({{0}, {1}, {5}, {9}});
  const auto r = cluster({Algorithm::kmeans, KMeansParams{4, 300, 1e-4}, 1}, x);
  EXPECT_EQ(r.cluster_count, 4u);
  EXPECT_EQ(r.inertia, 0.0);
  std::set<int> ids(r.assignments.begin(), r.assignments.end());
  EXPECT_EQ(ids.size(), 4u);
}

TEST(KMeans, TwoObviousClustersAnySeed) {
  const auto x = points({{0.0}, {0.1}, {9.9}, {10.0}});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = cluster({Algorithm::kmeans, KMeansParams{2, 300, 1e-4}, seed}, x);
    EXPECT_EQ(r.assignments[0], r.assignments[1]);
    EXPECT_EQ(r.assignments[2], r.assignments[3]);
    EXPECT_NE(r.assignments[0], r.assignments[2]);
  }
}

TEST(KMeans, InertiaNonIncreasing) {
  const auto ds = testing_support::blobs();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto r = cluster({Algorithm::kmeans, KMeansParams{4, 300, 0.0}, seed}, ds.features);
    ASSERT_FALSE(r.inertia_history.empty());
    for (std::size_t i = 1; i < r.inertia_history.size(); ++i) {
      EXPECT_LE(r.inertia_history[i], r.inertia_history[i - 1] + 1e-9);
    }
  }
}

TEST(Dbscan, TwoBlobsAndNoise) {
  const auto x = points({{0, 0}, {0.5, 0}, {0, 0.5}, {100, 100}, {100.5, 100}, {100, 100.5}, {-500, 300}});
  const auto r = cluster({Algorithm::dbscan, DbscanParams{1.0, 2}, 0}, x);
  EXPECT_EQ(r.assignments, (std::vector<int>{0, 0, 0, 1, 1, 1, -1}));
  EXPECT_EQ(r.cluster_count, 2u);
}
