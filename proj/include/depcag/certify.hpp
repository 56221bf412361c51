#pragma once

#include "depcag/config.hpp"

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace depcag {

/// A configuration turned into transition data, a certified dichotomy and
/// the theorem constants.
struct Problem {
  RunConfig cfg;
  std::shared_ptr<const GreenContext> ctx;
  Ed1Report ed1;
  std::vector<Mat> reduction;  // Z(t_{n+1}, t_n) over the verification window
  Mat P_hat;  // discrete projection at t_{k_lo}
  double r = 0.5;
  std::optional<DiscreteDichotomy> discrete;  // discrete-auto only
  EdpCheck edp;
  TheoremConditions cond;
};

/// Transition data covers the verification window and everything the maps
/// and bounded solutions need for times in [t_lo, t_hi].
Problem build_problem(const RunConfig& cfg, double t_lo, double t_hi, Exec exec = Exec::Parallel);

/// Every certified constant, with the derivation method of each bound.
Json constants_json(const Problem& p);
Json condition_c_json(const ConditionCReport& rep);
Json conditions_json(const TheoremConditions& c);
Json vec_json(const Vec& v);

struct CriterionResult {
  std::string id;
  std::string title;
  bool applicable = true;
  bool pass = false;
  /// Non-gating results are reported but do not decide the overall verdict.
  bool gating = true;
  Json detail;
};

Json criterion_json(const CriterionResult& r);

using Rng = std::mt19937_64;
double uniform(Rng& rng, double lo, double hi);
/// Uniform in the Euclidean ball of the given radius.
Vec random_in_ball(Rng& rng, int n, double radius);

CriterionResult check_cocycle(const Problem& p, Rng& rng, int triples = 100);
CriterionResult check_transition_residual(const Problem& p, Rng& rng, int points = 200);
CriterionResult check_dichotomy(const Problem& p);
CriterionResult check_green_bound(const Problem& p, Rng& rng, int per_axis = 100);
CriterionResult check_bounded(const Problem& p, Rng& rng, int samples = 20);
CriterionResult check_proximity(const Problem& p, const ConjugacyEngine& engine, Rng& rng, int times = 5,
                                int per_time = 10);

/// Inverse identity at `times` sample times. With `tolerance_ratio` set, the
/// same points are rerun with picard_tol halved and the ratio of the largest
/// residuals is reported as a second result.
std::vector<CriterionResult> check_inverse(const Problem& p, const ConjugacyEngine& engine, Rng& rng,
                                           bool tolerance_ratio, int times = 5, int per_time = 20);

CriterionResult check_solution_mapping(const Problem& p, const ConjugacyEngine& engine, Rng& rng,
                                       int samples = 50);
CriterionResult check_envelope(const Problem& p, Rng& rng, int pairs = 20);
CriterionResult check_holder(const Problem& p, const ConjugacyEngine& engine, std::uint64_t seed);
CriterionResult check_limit_case(const Problem& p, Rng& rng);

struct SuiteOptions {
  bool include_tolerance_ratio = true;
};

/// Runs every applicable criterion for one configuration, in a fixed order,
/// with generators seeded from cfg.seed.
std::vector<CriterionResult> run_suite(const Problem& p, const SuiteOptions& opt = {});

}  // namespace depcag
