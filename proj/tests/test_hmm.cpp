#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "oracles.hpp"
#include "wmfcc/hmm_train.hpp"
#include "wmfcc/log_math.hpp"
#include "wmfcc/speaker.hpp"

using namespace wmfcc;

namespace {

bool same_log(double a, double b, double tol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) < tol;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

std::vector<MatrixXd> random_sequences(std::mt19937_64& gen, int count, Index min_len, Index max_len,
                                       Index dim) {
  std::uniform_int_distribution<Index> len(min_len, max_len);
  std::vector<MatrixXd> out;
  for (int s = 0; s < count; ++s) {
    const Index t = len(gen);
    MatrixXd x = oracle::random_obs(gen, t, dim);
    // A drift makes the left-to-right segmentation meaningful.
    for (Index i = 0; i < t; ++i) x.row(i).array() += 3.0 * i / t;
    out.push_back(x);
  }
  return out;
}

}  // namespace

TEST_CASE("log-sum-exp") {
  VectorXd v(3);
  v << -1000.0, -1000.0, -1000.0;
  CHECK(log_sum_exp(v) == doctest::Approx(-1000.0 + std::log(3.0)));
  v << log_zero<double>(), 0.0, log_zero<double>();
  CHECK(log_sum_exp(v) == 0.0);
  v.setConstant(log_zero<double>());
  CHECK(log_sum_exp(v) == log_zero<double>());
  CHECK(log_sum_exp(VectorXd()) == log_zero<double>());
  CHECK(log_add(std::log(2.0), std::log(3.0)) == doctest::Approx(std::log(5.0)));
  CHECK(log_add(log_zero<double>(), 1.5) == 1.5);
}

TEST_CASE("gaussian mixture density") {
  const auto g = GaussianMixture<double>::single(VectorXd::Zero(1), VectorXd::Ones(1));
  CHECK(log_gmm_pdf(g, VectorXd::Zero(1)) == doctest::Approx(-0.5 * std::log(2 * std::numbers::pi)));
  CHECK(log_gmm_pdf(g, VectorXd::Zero(1)) == doctest::Approx(-0.9189385));

  GaussianMixture<double> twin;
  twin.weights = VectorXd::Constant(2, 0.5);
  twin.means = MatrixXd::Zero(2, 1);
  twin.variances = MatrixXd::Ones(2, 1);
  CHECK(log_gmm_pdf(twin, VectorXd::Constant(1, 0.7)) ==
        doctest::Approx(log_gmm_pdf(g, VectorXd::Constant(1, 0.7))).epsilon(1e-15));
  CHECK(code_of([&] { log_gmm_pdf(g, VectorXd::Zero(2)); }) == ErrorCode::DimensionMismatch);

  std::mt19937_64 gen(3);
  for (int k = 0; k < 20; ++k) {
    const auto h = oracle::random_hmm(gen, 1, 3, 3);
    const VectorXd o = oracle::random_obs(gen, 1, h.dim()).row(0).transpose();
    CHECK(std::abs(log_gmm_pdf(h.emissions[0], o) - oracle::gmm_log_pdf(h.emissions[0], o)) < 1e-12);
  }
  // Far from every mean the density is tiny but the log stays finite.
  CHECK(std::isfinite(log_gmm_pdf(g, VectorXd::Constant(1, 60.0))));
}

TEST_CASE("forward and viterbi match exhaustive path enumeration") {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<Index> len(1, 6);
  for (int trial = 0; trial < 200; ++trial) {
    const auto h = oracle::random_hmm(gen, 3, 2, 2);
    REQUIRE(h.check().empty());
    const MatrixXd obs = oracle::random_obs(gen, len(gen), h.dim());
    const auto truth = oracle::enumerate_paths(h, obs);
    CHECK(same_log(forward_log_likelihood(h, obs), truth.total, 1e-9));
    const auto v = viterbi(h, obs);
    CHECK(same_log(v.log_prob, truth.best, 1e-9));
    if (std::isfinite(truth.best)) CHECK(v.states == truth.best_path);
  }
}

TEST_CASE("single-state chain sums frame densities") {
  std::mt19937_64 gen(5);
  auto h = oracle::random_hmm(gen, 1, 2, 2);
  const MatrixXd obs = oracle::random_obs(gen, 7, h.dim());
  double sum = 0;
  for (Index t = 0; t < 7; ++t) sum += log_gmm_pdf(h.emissions[0], obs.row(t).transpose());
  CHECK(forward_log_likelihood(h, obs) == doctest::Approx(sum).epsilon(1e-13));
  const auto v = viterbi(h, obs);
  CHECK(v.states == std::vector<int>(7, 0));
  CHECK(v.log_prob == doctest::Approx(sum).epsilon(1e-13));
}

TEST_CASE("left-to-right model with two frames only reaches states 0 and 1") {
  std::mt19937_64 gen(8);
  const auto base = oracle::random_hmm(gen, 1, 2, 2);
  Hmm<double> h;
  h.initial = VectorXd::Unit(4, 0);
  h.transitions = left_to_right_transitions<double>(4, 1, 0.8);
  h.emissions.assign(4, base.emissions[0]);
  const MatrixXd obs = oracle::random_obs(gen, 2, h.dim());
  const auto truth = oracle::enumerate_paths(h, obs);
  CHECK(std::abs(forward_log_likelihood(h, obs) - truth.total) < 1e-12);
  const MatrixXd alpha = forward_variables(h, emission_log_likelihoods(h, obs));
  CHECK(std::isinf(alpha(1, 2)));
  CHECK(std::isinf(alpha(1, 3)));
  h.termination = Termination::FinalState;
  CHECK(std::isinf(forward_log_likelihood(h, obs)));
}

TEST_CASE("one-hot transitions force the viterbi path") {
  std::mt19937_64 gen(9);
  auto h = oracle::random_hmm(gen, 3, 2, 2);
  h.max_jump = kErgodic;
  const Index n = h.states();
  h.initial = VectorXd::Unit(n, n - 1);
  h.transitions = MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) h.transitions(i, (i + 1) % n) = 1.0;
  const auto v = viterbi(h, oracle::random_obs(gen, 6, h.dim()));
  for (std::size_t t = 0; t < 6; ++t) CHECK(v.states[t] == static_cast<int>((n - 1 + t) % n));
}

TEST_CASE("viterbi ties go to the lower state") {
  Hmm<double> h;
  h.max_jump = kErgodic;
  h.initial = VectorXd::Constant(2, 0.5);
  h.transitions = MatrixXd::Constant(2, 2, 0.5);
  h.emissions.assign(2, GaussianMixture<double>::single(VectorXd::Zero(1), VectorXd::Ones(1)));
  const auto v = viterbi(h, MatrixXd::Zero(3, 1));
  CHECK(v.states == std::vector<int>{0, 0, 0});
}

TEST_CASE("forward and viterbi errors") {
  std::mt19937_64 gen(1);
  const auto h = oracle::random_hmm(gen, 2, 1, 2);
  CHECK(code_of([&] { forward_log_likelihood(h, MatrixXd(0, h.dim())); }) == ErrorCode::EmptySequence);
  CHECK(code_of([&] { forward_log_likelihood(h, MatrixXd::Zero(3, h.dim() + 1)); }) ==
        ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { viterbi(h, MatrixXd(0, h.dim())); }) == ErrorCode::EmptySequence);
}

TEST_CASE("transition band helper") {
  const MatrixXd a = left_to_right_transitions<double>(4, 2, 0.6);
  CHECK(a(0, 0) == 0.6);
  CHECK(a(0, 1) == doctest::Approx(0.2));
  CHECK(a(0, 3) == 0.0);
  CHECK(a(2, 3) == doctest::Approx(0.4));
  CHECK(a(3, 3) == 1.0);
  CHECK(a(1, 0) == 0.0);
}

TEST_CASE("init_hmm") {
  std::mt19937_64 gen(21);
  const auto seqs = random_sequences(gen, 5, 12, 20, 3);
  const auto a = init_hmm(seqs, 4, 3, 99);
  const auto b = init_hmm(seqs, 4, 3, 99);
  CHECK(a.check().empty());
  CHECK(a.initial == VectorXd::Unit(4, 0));
  CHECK(a.transitions(0, 0) == 0.8);
  CHECK(a.transitions(0, 1) == doctest::Approx(0.2));
  for (Index j = 0; j < 4; ++j) {
    CHECK(a.emissions[j].means == b.emissions[j].means);
    CHECK(a.emissions[j].variances == b.emissions[j].variances);
  }

  SUBCASE("single state, single mixture: pooled moments") {
    const auto s = init_hmm(seqs, 1, 1, 1);
    const MatrixXd pool = stack_rows(seqs);
    const VectorXd mean = pool.colwise().mean();
    const VectorXd var = (pool.rowwise() - mean.transpose()).array().square().colwise().mean();
    CHECK((s.emissions[0].means.row(0).transpose() - mean).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((s.emissions[0].variances.row(0).transpose() - var).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((s.variance_floor - (1e-3 * var).cwiseMax(1e-6)).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("copies of one sequence segment identically") {
    const std::vector<MatrixXd> copies(3, seqs[0]);
    const auto c = init_hmm(copies, 3, 1, 5);
    for (Index j = 0; j < 3; ++j) {
      const Index begin = j * seqs[0].rows() / 3, end = (j + 1) * seqs[0].rows() / 3;
      const VectorXd block_mean = seqs[0].middleRows(begin, end - begin).colwise().mean();
      CHECK((c.emissions[j].means.row(0).transpose() - block_mean).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("errors") {
    CHECK(code_of([] { init_hmm(std::vector<MatrixXd>{}, 2, 1, 0); }) == ErrorCode::EmptyTrainingSet);
    CHECK(code_of([&] { init_hmm(std::vector<MatrixXd>{seqs[0].topRows(3)}, 4, 1, 0); }) ==
          ErrorCode::SequenceTooShort);
  }
}

TEST_CASE("baum-welch is monotone and preserves structure") {
  std::mt19937_64 gen(31);
  for (int run = 0; run < 20; ++run) {
    const auto seqs = random_sequences(gen, 4, 10, 25, 2);
    const auto init = init_hmm(seqs, 3, 2, gen());
    auto [model, trace] = baum_welch(init, seqs, 15, -1.0);  // negative tol: never stop early
    CHECK(trace.iterations == 15);
    CHECK(trace.log_likelihood.size() == 16);
    for (std::size_t k = 1; k < trace.log_likelihood.size(); ++k)
      CHECK(trace.log_likelihood[k] - trace.log_likelihood[k - 1] >= -1e-8);
    CHECK(model.check(1e-9).empty());
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 3; ++j)
        if (init.transitions(i, j) == 0) CHECK(model.transitions(i, j) == 0.0);
    CHECK(std::abs(trace.log_likelihood.back() - total_log_likelihood(model, seqs)) < 1e-9);
  }
}

TEST_CASE("single-state EM gives the closed form") {
  std::mt19937_64 gen(41);
  const auto seqs = random_sequences(gen, 3, 8, 15, 3);
  Hmm<double> h;
  h.initial = VectorXd::Ones(1);
  h.transitions = MatrixXd::Ones(1, 1);
  h.emissions = {GaussianMixture<double>::single(VectorXd::Constant(3, 5.0), VectorXd::Constant(3, 9.0))};
  HmmTrainConfig cfg;
  h.variance_floor = variance_floor_for(stack_rows(seqs), cfg);
  baum_welch_step(h, seqs);

  // Sequential sums in sequence order, as an accumulator would see them.
  VectorXd sum = VectorXd::Zero(3);
  Index count = 0;
  for (const auto& s : seqs)
    for (Index t = 0; t < s.rows(); ++t, ++count) sum += s.row(t).transpose();
  const VectorXd mean = sum / double(count);
  VectorXd var = VectorXd::Zero(3);
  for (const auto& s : seqs)
    for (Index t = 0; t < s.rows(); ++t) var += (s.row(t).transpose() - mean).array().square().matrix();
  var /= double(count);
  CHECK(h.emissions[0].means.row(0).transpose() == mean);
  CHECK((h.emissions[0].variances.row(0).transpose() - var.cwiseMax(h.variance_floor)).cwiseAbs().maxCoeff() <
        1e-12);
  CHECK(h.emissions[0].weights[0] == 1.0);
}

TEST_CASE("variance floor holds when data collapse") {
  std::vector<MatrixXd> seqs = {MatrixXd::Zero(10, 2), MatrixXd::Zero(10, 2)};
  seqs[0](0, 0) = 1.0;
  auto [model, trace] = baum_welch(init_hmm(seqs, 2, 2, 3), seqs, 5, 1e-4);
  CHECK(model.check().empty());
  for (const auto& mix : model.emissions) CHECK(mix.variances.minCoeff() >= 1e-6);
  for (double ll : trace.log_likelihood) CHECK(std::isfinite(ll));
}

TEST_CASE("baum-welch errors") {
  std::mt19937_64 gen(2);
  const auto seqs = random_sequences(gen, 2, 8, 8, 2);
  const auto h = init_hmm(seqs, 2, 1, 0);
  CHECK(code_of([&] { baum_welch(h, std::vector<MatrixXd>{}, 5, 1e-4); }) == ErrorCode::EmptyTrainingSet);
  CHECK(code_of([&] { baum_welch(h, std::vector<MatrixXd>{MatrixXd::Zero(5, 3)}, 5, 1e-4); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("identify: argmax, tie rule, constant emission offset") {
  std::mt19937_64 gen(51);
  std::vector<SpeakerModel> models;
  for (const char* id : {"carol", "alice", "bob"}) {
    const auto seqs = random_sequences(gen, 3, 10, 14, 2);
    models.push_back({id, baum_welch(init_hmm(seqs, 3, 2, 1), seqs, 5, 1e-4).first, FeatureKind::Mfcc, ""});
  }
  FeatureSequence seq;
  seq.kind = FeatureKind::Mfcc;
  seq.vectors = random_sequences(gen, 1, 12, 12, 2)[0];

  const auto r = identify(models, seq);
  REQUIRE(r.ranked.size() == 3);
  CHECK(r.ranked[0].second >= r.ranked[1].second);
  CHECK(r.ranked[1].second >= r.ranked[2].second);
  CHECK(r.speaker_id == r.ranked[0].first);

  // Shifting every log density by c moves every score by T * c.
  const double c = -3.25;
  std::vector<std::pair<std::string, double>> shifted;
  for (const auto& m : models) {
    const MatrixXd log_b = emission_log_likelihoods(m.hmm, seq.vectors);
    const double base = forward_from_emissions(m.hmm, log_b);
    const double moved = forward_from_emissions(m.hmm, (log_b.array() + c).matrix().eval());
    CHECK(moved - base == doctest::Approx(c * seq.frames()).epsilon(1e-12));
    shifted.emplace_back(m.speaker_id, moved);
  }
  CHECK(rank_scores(shifted).speaker_id == r.speaker_id);

  const auto one = identify({models[0]}, seq);
  CHECK(one.speaker_id == "carol");

  auto twins = std::vector<SpeakerModel>{models[0], models[0]};
  twins[0].speaker_id = "zed";
  twins[1].speaker_id = "abe";
  CHECK(identify(twins, seq).speaker_id == "abe");

  CHECK(code_of([&] { identify({}, seq); }) == ErrorCode::EmptyModelSet);
  seq.kind = FeatureKind::WaveletMfcc;
  CHECK(code_of([&] { identify(models, seq); }) == ErrorCode::FeatureKindMismatch);
}

TEST_CASE("model files round-trip exactly") {
  std::mt19937_64 gen(61);
  const auto seqs = random_sequences(gen, 3, 10, 14, 4);
  SpeakerModel m{"spk07", baum_welch(init_hmm(seqs, 4, 2, 1), seqs, 4, 1e-4).first, FeatureKind::WaveletMfcc,
                 "00ff00ff00ff00ff"};
  const auto dir = std::filesystem::temp_directory_path() / "wmfcc_models";
  std::filesystem::create_directories(dir);
  save_model(dir / "spk07.model.json", m);
  const auto back = load_model(dir / "spk07.model.json");
  CHECK(back.speaker_id == m.speaker_id);
  CHECK(back.feature_kind == m.feature_kind);
  CHECK(back.config_hash == m.config_hash);
  CHECK(back.hmm.initial == m.hmm.initial);
  CHECK(back.hmm.transitions == m.hmm.transitions);
  CHECK(back.hmm.variance_floor == m.hmm.variance_floor);
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(back.hmm.emissions[j].weights == m.hmm.emissions[j].weights);
    CHECK(back.hmm.emissions[j].means == m.hmm.emissions[j].means);
    CHECK(back.hmm.emissions[j].variances == m.hmm.emissions[j].variances);
  }
  CHECK(load_models(dir).size() == 1);
  std::filesystem::remove_all(dir);
}
