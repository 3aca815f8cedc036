#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "biosketch/eval.hpp"
#include "biosketch/oracle.hpp"
#include "biosketch/store.hpp"

using namespace biosketch;

namespace {

constexpr int kExitAccept = 0;
constexpr int kExitDeny = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

// stream tag for the default weight seed
constexpr std::uint64_t kWeightStream = 0x77656967687473;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  unsigned m = 5;
  std::vector<unsigned> k_symbols;
  std::vector<double> security;
  std::string scheme = "ss";
  std::string policy = "fallback";
  std::string fusion = "bla";
  std::optional<std::size_t> fused_dim;
  double window = kDefaultWindow;
  std::uint64_t seed = 1;
  std::string dataset;
  std::string templates_dir = "templates";
  std::string keys_dir = "keys";
  std::string weights;
  std::uint64_t trials = 0;
  std::string scenario = "stolen-key";
  std::string out;

  Scheme scheme_v() const { return scheme == "ss" ? Scheme::SecureSketch : Scheme::FuzzyCommitment; }
  DecodePolicy policy_v() const {
    return policy == "fail-deny" ? DecodePolicy::FailDeny : DecodePolicy::FallbackSystematic;
  }
  FusionMode fusion_v() const { return fusion == "fca" ? FusionMode::FCA : FusionMode::BLA; }
  Scenario scenario_v() const { return scenario == "zero-effort" ? Scenario::ZeroEffort : Scenario::StolenKey; }

  std::vector<unsigned> resolve_k() const {
    std::vector<unsigned> ks = k_symbols;
    for (double s : security) ks.push_back(params_for_security(m, s).k_symbols);
    return ks;
  }

  unsigned single_k() const {
    const auto ks = resolve_k();
    if (ks.size() != 1) throw UsageError("exactly one of --k-symbols or --security (single value) is required");
    return ks.front();
  }
};

EmbeddingDataset load_dataset(const Options& o) {
  if (o.dataset.empty()) throw UsageError("--dataset is required");
  return read_embeddings(o.dataset);
}

FusionWeights make_weights(const Options& o, const EmbeddingDataset& ds) {
  if (!o.weights.empty()) {
    auto w = load_weights(o.weights);
    if (w.d_face != ds.d_face() || w.d_iris != ds.d_iris()) {
      throw Error(Errc::DimensionMismatch, "weights do not match dataset dimensions");
    }
    return w;
  }
  return random_weights(o.fusion_v(), ds.d_face(), ds.d_iris(), o.fused_dim, derive_seed(o.seed, kWeightStream));
}

const Subject& find_subject(const EmbeddingDataset& ds, const std::string& id) {
  const auto* s = ds.find(id);
  if (s == nullptr) throw Error(Errc::NotFound, "subject " + id + " not in dataset");
  return *s;
}

std::size_t enrollment_count(const Subject& s) { return (s.samples.size() + 1) / 2; }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
  } else {
    detail::write_file(o.out, text);
  }
}

// ---- gen

struct GenOptions {
  SynthParams p;
  std::string weights_out;
};

int cmd_gen(const Options& o, GenOptions g) {
  if (o.out.empty()) throw UsageError("gen needs --out");
  g.p.seed = o.seed;
  const auto ds = gen_population(g.p);
  write_embeddings(ds, o.out);
  std::cout << "wrote " << ds.subjects.size() << " subjects x " << g.p.samples_per_subject << " pairs to " << o.out
            << "\n";
  if (!g.weights_out.empty()) {
    save_weights(make_weights(o, ds), g.weights_out);
    std::cout << "wrote weights to " << g.weights_out << "\n";
  }
  return kExitAccept;
}

// ---- enroll

struct EnrollOptions {
  std::string subject;
  std::vector<std::size_t> samples;
};

int cmd_enroll(const Options& o, const EnrollOptions& e) {
  const unsigned k = o.single_k();
  const auto ds = load_dataset(o);
  const RsCode code(Field(o.m), k);
  const auto pipe = Pipeline::from_reference(ds, make_weights(o, ds), static_cast<unsigned>(code.n_bits()), o.window);
  const auto& subj = find_subject(ds, e.subject);

  std::vector<Vector> fused;
  if (e.samples.empty()) {
    for (std::size_t i = 0; i < enrollment_count(subj); ++i) fused.push_back(pipe.fuse_sample(subj.samples[i]));
  } else {
    for (auto i : e.samples) {
      if (i >= subj.samples.size()) throw Error(Errc::IndexOutOfRange, "sample index " + std::to_string(i));
      fused.push_back(pipe.fuse_sample(subj.samples[i]));
    }
  }

  const TemplateDb db(o.templates_dir);
  const KeyStore keys(o.keys_dir);
  if (db.contains(e.subject) || keys.contains(e.subject)) {
    throw Error(Errc::DuplicateSubject, e.subject + " is already enrolled; revoke first");
  }
  const auto secrets = fresh_secrets(o.seed, e.subject, keys.revoked(e.subject));
  const auto user = pipe.make_template(fused, secrets.nonce);
  const auto rec = seal(user.reliable_bits, code, o.scheme_v(), o.policy_v(), secrets, e.subject);
  keys.save(e.subject, user.key);
  db.save(e.subject, rec);
  std::cout << "enrolled " << e.subject << " scheme=" << to_string(rec.scheme) << " m=" << o.m << " K=" << k
            << " n=" << code.n_bits() << " samples=" << fused.size() << "\n";
  return kExitAccept;
}

// ---- auth

struct AuthOptions {
  std::string subject;
  std::string probe_file;
  std::string probe_subject;
  std::optional<std::size_t> probe_sample;
  bool random_probe = false;
};

int print_decision(const Decision& d) {
  const char* reason = d.reason == DecisionReason::HashMatch      ? "hash-match"
                       : d.reason == DecisionReason::HashMismatch ? "hash-mismatch"
                                                                  : "decode-failure";
  std::cout << (d.accepted ? "ACCEPT" : "DENY") << " (" << reason << ")\n";
  return d.accepted ? kExitAccept : kExitDeny;
}

int cmd_auth(const Options& o, const AuthOptions& a) {
  const TemplateDb db(o.templates_dir);
  const KeyStore keys(o.keys_dir);
  const auto rec = db.load(a.subject);
  const auto key = keys.load(a.subject);
  const auto code = rec.params.make_code();

  if (a.random_probe) {
    const std::uint64_t trials = std::max<std::uint64_t>(o.trials, 1);
    std::uint64_t accepted = 0;
    Decision last{};
    for (std::uint64_t t = 0; t < trials; ++t) {
      Rng rng(derive_seed(o.seed, t));
      BitVector r_b(code.n_bits());
      for (std::size_t i = 0; i < r_b.size(); ++i) r_b.set(i, rng.bit());
      last = authenticate(r_b, rec, code);
      accepted += last.accepted;
    }
    if (trials == 1) return print_decision(last);
    const double far = static_cast<double>(accepted) / static_cast<double>(trials);
    std::cout << "accepted " << accepted << " of " << trials << " fraction=" << fmt("%.6e", far)
              << " analytic=" << fmt("%.6e", std::ldexp(1.0, -static_cast<int>(code.k_bits()))) << "\n";
    return kExitAccept;
  }

  const auto ds = load_dataset(o);
  const auto pipe = Pipeline::from_reference(ds, make_weights(o, ds), static_cast<unsigned>(code.n_bits()));
  const std::string probe_id = a.probe_subject.empty() ? a.subject : a.probe_subject;

  const SamplePair* probe = nullptr;
  EmbeddingDataset pf;
  if (!a.probe_file.empty()) {
    pf = read_embeddings(a.probe_file);
    const Subject* s = a.probe_subject.empty() && pf.subjects.size() == 1 ? &pf.subjects.front() : pf.find(probe_id);
    if (s == nullptr) throw Error(Errc::NotFound, "subject " + probe_id + " not in probe file");
    const std::size_t i = a.probe_sample.value_or(0);
    if (i >= s->samples.size()) throw Error(Errc::IndexOutOfRange, "probe sample " + std::to_string(i));
    probe = &s->samples[i];
  } else {
    const auto& s = find_subject(ds, probe_id);
    const std::size_t i = a.probe_sample.value_or(std::min(enrollment_count(s), s.samples.size() - 1));
    if (i >= s.samples.size()) throw Error(Errc::IndexOutOfRange, "probe sample " + std::to_string(i));
    probe = &s.samples[i];
  }
  return print_decision(authenticate(pipe.probe_bits(*probe, key), rec, code));
}

// ---- revoke

int cmd_revoke(const Options& o, const std::string& subject) {
  revoke(TemplateDb(o.templates_dir), KeyStore(o.keys_dir), subject);
  std::cout << "revoked " << subject << "\n";
  return kExitAccept;
}

// ---- eval

struct EvalOptions {
  std::string impostors = "embeddings";
  std::string probes = "held-out";
  SynthParams synth;
};

int cmd_eval(const Options& o, const EvalOptions& e) {
  EmbeddingDataset ds;
  if (o.dataset.empty()) {
    auto p = e.synth;
    p.seed = o.seed;
    ds = gen_population(p);
  } else {
    ds = read_embeddings(o.dataset);
  }
  EvalConfig cfg;
  cfg.m = o.m;
  cfg.scheme = o.scheme_v();
  cfg.policy = o.policy_v();
  cfg.window = o.window;
  cfg.scenario = o.scenario_v();
  cfg.impostors = e.impostors == "uniform" ? ImpostorSource::UniformBits : ImpostorSource::Embeddings;
  cfg.probes = e.probes == "enrollment" ? ProbeSet::Enrollment : ProbeSet::HeldOut;
  cfg.far_trials = o.trials;
  cfg.seed = o.seed;
  auto ks = o.resolve_k();
  if (ks.empty()) {
    for (unsigned k = 1; k < (1U << o.m); ++k) ks.push_back(k);
  }
  emit(o, gs_curve_csv(run_gs_curve(ds, make_weights(o, ds), cfg, ks)));
  return kExitAccept;
}

// ---- oracle

struct OracleOptions {
  std::string received;
};

int cmd_oracle(const Options& o, const OracleOptions& a) {
  const RsCode code(Field(o.m), o.single_k());
  if (!a.received.empty()) {
    std::vector<Symbol> r;
    std::stringstream in(a.received);
    for (std::string tok; std::getline(in, tok, ',');) r.push_back(static_cast<Symbol>(std::stoul(tok)));
    if (r.size() != code.n_symbols()) throw UsageError("--received needs " + std::to_string(code.n_symbols()) + " symbols");
    const auto res = oracle::nearest_codeword(code, r);
    std::cout << "distance=" << res.distance << " ties=" << res.best_codewords.size() << "\n";
    for (const auto& c : res.best_codewords) {
      for (std::size_t i = 0; i < c.size(); ++i) std::cout << (i ? "," : "") << c[i];
      std::cout << "\n";
    }
    const auto d = code.decode(r, o.policy_v());
    std::cout << "decoder=" << to_string(d.status) << "\n";
    return kExitAccept;
  }
  const std::uint64_t trials = o.trials == 0 ? 10000 : o.trials;
  const double rate = oracle::column_collision_rate(code, trials, o.seed);
  std::cout << "m=" << o.m << " K=" << code.k_symbols() << " trials=" << trials << " collision_rate=" << fmt("%.6e", rate)
            << " analytic=" << fmt("%.6e", std::ldexp(1.0, -static_cast<int>(code.k_bits()))) << "\n";
  return kExitAccept;
}

// ---- params

int cmd_params(const Options& o, bool m_given, std::size_t feature_bits) {
  std::vector<unsigned> ms = m_given ? std::vector<unsigned>{o.m} : std::vector<unsigned>{5, 6, 7};
  std::ostringstream out;
  for (unsigned m : ms) {
    std::vector<CodePlan> plans;
    for (unsigned k : o.k_symbols) plans.push_back(params_for_k(m, k));
    for (double s : o.security) plans.push_back(params_for_security(m, s));
    if (plans.empty()) {
      for (double s : {53.0, 80.0, 100.0}) plans.push_back(params_for_security(m, s));
    }
    for (const auto& p : plans) {
      out << "m=" << p.m << " N=" << p.n_symbols << " n=" << p.n_bits << " K=" << p.k_symbols
          << " t=" << (p.n_symbols - p.k_symbols) / 2 << " security=" << p.requested_bits
          << " achieved=" << p.achieved_bits << " rate=" << fmt("%.6f", p.rate);
      if (p.n_bits <= feature_bits) out << " residual=" << privacy_report(feature_bits, p.n_bits).residual;
      out << "\n";
    }
  }
  emit(o, out.str());
  return kExitAccept;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cancelable multimodal biometric key binding with Reed-Solomon secure sketches"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file; command-line flags take precedence");

  Options o;
  app.add_option("--m", o.m, "symbol size in bits")->check(CLI::Range(2, 10));
  app.add_option("--k-symbols", o.k_symbols, "message length K in symbols (repeatable)");
  app.add_option("--security", o.security, "target security in bits (repeatable)");
  app.add_option("--scheme", o.scheme, "ss or fc")->check(CLI::IsMember({"ss", "fc"}));
  app.add_option("--policy", o.policy, "fail-deny or fallback")->check(CLI::IsMember({"fail-deny", "fallback"}));
  app.add_option("--fusion", o.fusion, "fca or bla")->check(CLI::IsMember({"fca", "bla"}));
  app.add_option("--fused-dim", o.fused_dim, "fused vector length for generated weights");
  app.add_option("--window", o.window, "reliable-bit window factor (>= 1)")->check(CLI::Range(1.0, 1e9));
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--dataset", o.dataset, "embeddings CSV");
  app.add_option("--templates-dir", o.templates_dir, "record store");
  app.add_option("--keys-dir", o.keys_dir, "key store");
  app.add_option("--weights", o.weights, "fusion weights file");
  app.add_option("--trials", o.trials, "trial count");
  app.add_option("--scenario", o.scenario, "zero-effort or stolen-key")
      ->check(CLI::IsMember({"zero-effort", "stolen-key"}));
  app.add_option("--out", o.out, "output path");

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "write a synthetic embeddings CSV");
  gen_cmd->add_option("--subjects", gen.p.num_subjects)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--samples", gen.p.samples_per_subject)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--d-face", gen.p.d_face)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--d-iris", gen.p.d_iris)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--between-std", gen.p.between_std);
  gen_cmd->add_option("--within-std", gen.p.within_std);
  gen_cmd->add_option("--weights-out", gen.weights_out, "also write fusion weights here");

  EnrollOptions enroll;
  auto* enroll_cmd = app.add_subcommand("enroll", "enroll a subject from dataset samples");
  enroll_cmd->add_option("--subject", enroll.subject)->required();
  enroll_cmd->add_option("--sample", enroll.samples, "sample indices (default: first half)");

  AuthOptions auth;
  auto* auth_cmd = app.add_subcommand("auth", "verify a probe against an enrolled subject");
  auth_cmd->add_option("--subject", auth.subject, "claimed identity")->required();
  auth_cmd->add_option("--probe-file", auth.probe_file, "embeddings CSV holding the probe");
  auth_cmd->add_option("--probe-subject", auth.probe_subject, "whose sample to present");
  auth_cmd->add_option("--probe-sample", auth.probe_sample, "sample index");
  auth_cmd->add_flag("--random-probe", auth.random_probe, "present uniform random reliable bits (--trials times)");

  std::string revoke_subject;
  auto* revoke_cmd = app.add_subcommand("revoke", "delete a subject's record and key");
  revoke_cmd->add_option("--subject", revoke_subject)->required();

  EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "GAR / FAR sweep over K, written as CSV");
  eval_cmd->add_option("--impostors", ev.impostors, "embeddings or uniform")
      ->check(CLI::IsMember({"embeddings", "uniform"}));
  eval_cmd->add_option("--probes", ev.probes, "held-out or enrollment")
      ->check(CLI::IsMember({"held-out", "enrollment"}));
  eval_cmd->add_option("--within-std", ev.synth.within_std, "noise of the generated dataset when --dataset is absent");

  OracleOptions orc;
  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force standard-array checks on small codes");
  oracle_cmd->add_option("--received", orc.received, "comma-separated symbols to decode exhaustively");

  std::size_t feature_bits = kDefaultFusedDim;
  auto* params_cmd = app.add_subcommand("params", "print code parameters");
  params_cmd->add_option("--feature-bits", feature_bits, "binary feature length for the privacy column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen(o, gen);
    if (*enroll_cmd) return cmd_enroll(o, enroll);
    if (*auth_cmd) return cmd_auth(o, auth);
    if (*revoke_cmd) return cmd_revoke(o, revoke_subject);
    if (*eval_cmd) return cmd_eval(o, ev);
    if (*oracle_cmd) return cmd_oracle(o, orc);
    if (*params_cmd) return cmd_params(o, app.count("--m") > 0, feature_bits);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
