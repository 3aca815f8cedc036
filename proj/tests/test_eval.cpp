#include <gtest/gtest.h>

#include <cmath>

#include "biosketch/eval.hpp"

using namespace biosketch;

namespace {

// Pinned synthetic config: 50 subjects x 20 pairs, 64-d face and iris,
// BLA without projection so the fused vector has 4096 components.
EmbeddingDataset pinned(double within = 0.5) {
  SynthParams p;
  p.within_std = within;
  return gen_population(p);
}

FusionWeights bla() { return random_weights(FusionMode::BLA, 64, 64, std::nullopt, 0); }

double three_sigma(double p, double trials) { return 3.0 * std::sqrt(p * (1 - p) / trials); }

}  // namespace

TEST(Params, SecurityToCode) {
  struct Row {
    unsigned m;
    double bits;
    unsigned N, n, K;
    double rate;
  };
  for (const auto& r : {Row{5, 100, 31, 155, 20, 100.0 / 155}, Row{6, 53, 63, 378, 9, 54.0 / 378},
                        Row{7, 100, 127, 889, 14, 98.0 / 889}, Row{5, 53, 31, 155, 11, 55.0 / 155},
                        Row{5, 80, 31, 155, 16, 80.0 / 155}, Row{3, 21, 7, 21, 7, 1.0}}) {
    const auto p = params_for_security(r.m, r.bits);
    EXPECT_EQ(p.n_symbols, r.N);
    EXPECT_EQ(p.n_bits, r.n);
    EXPECT_EQ(p.k_symbols, r.K);
    EXPECT_EQ(p.achieved_bits, r.K * r.m);
    EXPECT_DOUBLE_EQ(p.rate, r.rate);
  }
}

TEST(Params, RatesAtStandardSecurities) {
  EXPECT_NEAR(params_for_security(5, 100).rate, 0.65, 0.01);
  EXPECT_NEAR(params_for_security(6, 53).rate, 0.14, 0.01);
  EXPECT_NEAR(params_for_security(7, 100).rate, 0.11, 0.01);
  EXPECT_NEAR(params_for_security(5, 53).rate, 0.34, 0.02);
  EXPECT_NEAR(params_for_security(5, 80).rate, 0.52, 0.01);
}

TEST(Params, Errors) {
  EXPECT_THROW(params_for_security(5, 156), Error);
  try {
    params_for_security(3, 22);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SecurityTooHigh);
  }
  EXPECT_THROW(params_for_security(11, 10), Error);
  EXPECT_THROW(params_for_security(5, 0), Error);
  EXPECT_EQ(params_for_security(5, 1).k_symbols, 1U);
}

TEST(Privacy, Report) {
  const auto a = privacy_report(4096, 155);
  EXPECT_EQ(a.residual, 3941U);
  EXPECT_EQ(a.max_leakage, 155U);
  EXPECT_EQ(a.entropy, 4096U);
  EXPECT_EQ(privacy_report(4096, 378).residual, 3718U);
  const auto z = privacy_report(4096, 0);
  EXPECT_EQ(z.residual, 4096U);
  EXPECT_EQ(z.max_leakage, 0U);
  EXPECT_THROW(privacy_report(10, 11), Error);
}

TEST(Gar, ProbesEqualEnrollmentAlwaysAccepted) {
  const auto ds = pinned();
  for (auto scheme : {Scheme::SecureSketch, Scheme::FuzzyCommitment}) {
    for (auto policy : {DecodePolicy::FailDeny, DecodePolicy::FallbackSystematic}) {
      EvalConfig cfg;
      cfg.scheme = scheme;
      cfg.policy = policy;
      cfg.probes = ProbeSet::Enrollment;
      const Evaluation ev(ds, bla(), cfg);
      for (unsigned k : {1U, 11U, 20U, 27U, 31U}) {
        const RsCode code(Field(5), k);
        if (ev.enrolled_count(code) == 0) {
          // only the secure sketch can refuse enrollment
          EXPECT_TRUE(scheme == Scheme::SecureSketch && policy == DecodePolicy::FailDeny);
          EXPECT_THROW(ev.gar(code), Error);
          continue;
        }
        EXPECT_EQ(ev.gar(code), 1.0) << "K=" << k;
      }
    }
  }
}

TEST(Gar, NoiselessDataAlwaysAccepted) {
  const auto ds = pinned(0.0);
  EvalConfig cfg;
  const Evaluation ev(ds, bla(), cfg);
  EXPECT_EQ(ev.gar(RsCode(Field(5), 20)), 1.0);
}

TEST(Gar, GoldenPinnedConfig) {
  EvalConfig cfg;
  const Evaluation ev(pinned(), bla(), cfg);
  EXPECT_EQ(ev.gar(RsCode(Field(5), 20)), 0.39);
  EXPECT_EQ(ev.gar(RsCode(Field(5), 11)), 0.518);
}

TEST(Gar, NeedsTwoSamplesPerSubject) {
  SynthParams p;
  p.num_subjects = 3;
  p.samples_per_subject = 1;
  const auto ds = gen_population(p);
  try {
    Evaluation(ds, bla(), EvalConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InsufficientData);
  }
}

TEST(Gar, DecreasesWithCorrectionCapacityLoss) {
  const Evaluation ev(pinned(), bla(), EvalConfig{});
  double prev = 2;
  for (unsigned k : {1U, 5U, 11U, 16U, 20U, 25U}) {
    const double g = ev.gar(RsCode(Field(5), k));
    EXPECT_LE(g, prev);
    prev = g;
  }
}

TEST(Gar, FailDenyEnrollmentCount) {
  EvalConfig cfg;
  cfg.policy = DecodePolicy::FailDeny;
  const Evaluation ev(pinned(), bla(), cfg);
  EXPECT_EQ(ev.enrolled_count(RsCode(Field(5), 31)), 50U);
  EXPECT_EQ(ev.enrolled_count(RsCode(Field(5), 1)), 0U);
  cfg.scheme = Scheme::FuzzyCommitment;
  const Evaluation fc(pinned(), bla(), cfg);
  EXPECT_EQ(fc.enrolled_count(RsCode(Field(5), 1)), 50U);
  const std::vector<unsigned> ks{1};
  cfg.scheme = Scheme::SecureSketch;
  const auto pts = run_gs_curve(ev, cfg, ks);
  EXPECT_TRUE(std::isnan(pts[0].gar));
  EXPECT_EQ(pts[0].enrolled, 0U);
}

TEST(Far, ZeroTrialsRejected) {
  const Evaluation ev(pinned(), bla(), EvalConfig{});
  EXPECT_THROW(ev.empirical_far(RsCode(Field(5), 20), 0, 1), Error);
}

TEST(Far, MismatchedLengthDenied) {
  const Field f(3);
  const RsCode code(f, 2);
  const auto rec = enroll_ss(BitVector(21), code, DecodePolicy::FallbackSystematic, Salt{}, "v");
  EXPECT_FALSE(impostor_accepted(BitVector(30), rec, code));
  EXPECT_TRUE(impostor_accepted(BitVector(21), rec, code));
}

TEST(Far, UniformImpostorsMatchAnalyticRate) {
  SynthParams sp;
  sp.num_subjects = 10;
  sp.samples_per_subject = 4;
  sp.d_face = sp.d_iris = 8;
  const auto ds = gen_population(sp);
  EvalConfig cfg;
  cfg.m = 3;
  cfg.impostors = ImpostorSource::UniformBits;
  const Evaluation ev(ds, random_weights(FusionMode::BLA, 8, 8, std::nullopt, 0), cfg);
  const double trials = 20000;
  for (unsigned k : {1U, 2U}) {
    const double p = std::ldexp(1.0, -3 * static_cast<int>(k));
    const double far = ev.empirical_far(RsCode(Field(3), k), static_cast<std::uint64_t>(trials), 99);
    EXPECT_NEAR(far, p, three_sigma(p, trials)) << "K=" << k;
  }
}

TEST(Far, DeterministicGivenSeed) {
  EvalConfig cfg;
  cfg.scenario = Scenario::ZeroEffort;
  const Evaluation ev(pinned(), bla(), cfg);
  const RsCode code(Field(5), 3);
  EXPECT_EQ(ev.empirical_far(code, 500, 4), ev.empirical_far(code, 500, 4));
}

TEST(Curve, AnalyticFarRatio) {
  EvalConfig cfg;
  cfg.m = 3;
  SynthParams sp;
  sp.num_subjects = 4;
  sp.samples_per_subject = 2;
  sp.d_face = sp.d_iris = 6;
  const auto ds = gen_population(sp);
  const std::vector<unsigned> ks{1, 2, 3, 4, 5, 6, 7};
  const auto pts = run_gs_curve(ds, random_weights(FusionMode::BLA, 6, 6, std::nullopt, 0), cfg, ks);
  ASSERT_EQ(pts.size(), ks.size());
  for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_EQ(pts[i].far_analytic / pts[i - 1].far_analytic, 1.0 / 8);
  EXPECT_EQ(pts.back().far_analytic, std::ldexp(1.0, -21));
  EXPECT_EQ(pts.back().rate, 1.0);
  for (const auto& p : pts) {
    EXPECT_GE(p.gar, 0.0);
    EXPECT_LE(p.gar, 1.0);
    EXPECT_FALSE(p.far_empirical.has_value());
  }
}

TEST(Curve, RatesAtMFive) {
  std::vector<unsigned> ks;
  for (double b : {53.0, 80.0, 100.0}) ks.push_back(params_for_security(5, b).k_symbols);
  const auto pts = run_gs_curve(pinned(), bla(), EvalConfig{}, ks);
  EXPECT_NEAR(pts[0].rate, 0.34, 0.02);
  EXPECT_NEAR(pts[1].rate, 0.52, 0.01);
  EXPECT_NEAR(pts[2].rate, 0.65, 0.01);
}

TEST(Curve, CsvIsByteIdentical) {
  EvalConfig cfg;
  cfg.far_trials = 200;
  const std::vector<unsigned> ks{3, 11, 20};
  const auto a = gs_curve_csv(run_gs_curve(pinned(), bla(), cfg, ks));
  const auto b = gs_curve_csv(run_gs_curve(pinned(), bla(), cfg, ks));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.substr(0, a.find('\n')), kGsCsvHeader);
  EXPECT_NE(a.find("\n5,20,100,0.645161,0.390000,"), std::string::npos);
  EXPECT_NE(a.find(",ss,fallback,stolen-key\n"), std::string::npos);
}

TEST(Curve, CsvEmptyEmpiricalColumn) {
  GsCurvePoint p;
  p.m = 3;
  p.k = 1;
  p.security_bits = 3;
  p.rate = 1.0 / 7;
  p.gar = 1;
  p.far_analytic = 0.125;
  p.impostors = ImpostorSource::UniformBits;
  const std::vector<GsCurvePoint> pts{p};
  EXPECT_EQ(gs_curve_csv(pts), std::string(kGsCsvHeader) + "\n3,1,3,0.142857,1.000000,1.250000e-01,,ss,fallback,stolen-key+uniform\n");
}
