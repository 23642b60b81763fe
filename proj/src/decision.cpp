#include "wearauth/decision.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <set>
#include <thread>

#include "wearauth/errors.hpp"

namespace wearauth::decision {

namespace {

using features::FeatureVector;
using features::kFeatureCount;

double cityblock_raw(const FeatureVector& a, const FeatureVector& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    acc += std::fabs(a.values[i] - b.values[i]);
  }
  return acc;
}

double euclidean_raw(const FeatureVector& a, const FeatureVector& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    const double d = a.values[i] - b.values[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

double minkowski_raw(const FeatureVector& a, const FeatureVector& b, double p) {
  double acc = 0.0;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    acc += std::pow(std::fabs(a.values[i] - b.values[i]), p);
  }
  return std::pow(acc, 1.0 / p);
}

// (1 - cosine similarity) / 2; a zero vector has no direction, which maps
// to the orthogonality midpoint 0.5.
double cosine_distance(const FeatureVector& a, const FeatureVector& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.5;
  const double sim = dot / (std::sqrt(na) * std::sqrt(nb));
  return (1.0 - std::clamp(sim, -1.0, 1.0)) / 2.0;
}

bool is_constant(const FeatureVector& v) {
  for (std::size_t i = 1; i < kFeatureCount; ++i) {
    if (v.values[i] != v.values[0]) return false;
  }
  return true;
}

// (1 - Pearson r) / 2 over the 84 coordinates; r := 0 for a constant
// vector, the same midpoint convention.
double correlation_distance(const FeatureVector& a, const FeatureVector& b) {
  if (is_constant(a) || is_constant(b)) return 0.5;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    ma += a.values[i];
    mb += b.values[i];
  }
  ma /= kFeatureCount;
  mb /= kFeatureCount;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    const double da = a.values[i] - ma;
    const double db = b.values[i] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va == 0.0 || vb == 0.0) return 0.5;
  const double r = cov / (std::sqrt(va) * std::sqrt(vb));
  return (1.0 - std::clamp(r, -1.0, 1.0)) / 2.0;
}

void check_monotone(const Curves& c) {
  for (std::size_t t = 1; t < kThresholdSteps; ++t) {
    if (c.far[t] + 1e-12 < c.far[t - 1] || c.frr[t] > c.frr[t - 1] + 1e-12) {
      throw Error("FAR/FRR sweep lost monotonicity");
    }
  }
}

}  // namespace

MetricSpec metric_from_name(const std::string& name) {
  if (name == "euclidean") return {MetricKind::Euclidean, 2.0};
  if (name == "cosine") return {MetricKind::Cosine, 0.0};
  if (name == "correlation") return {MetricKind::Correlation, 0.0};
  if (name == "cityblock" || name == "manhattan") {
    return {MetricKind::Cityblock, 1.0};
  }
  if (name == "minkowski") return {MetricKind::MinkowskiP, 5.0};
  throw Error("unknown metric: " + name);
}

std::string metric_name(const MetricSpec& m) {
  switch (m.kind) {
    case MetricKind::Euclidean: return "euclidean";
    case MetricKind::MinkowskiP: return "minkowski";
    case MetricKind::Cosine: return "cosine";
    case MetricKind::Correlation: return "correlation";
    case MetricKind::Cityblock: return "cityblock";
  }
  return "?";
}

double distance(const FeatureVector& a, const FeatureVector& b,
                const MetricSpec& m) {
  if (a.values.size() != b.values.size()) {
    throw LengthMismatch(a.values.size(), b.values.size());
  }
  if (m.kind == MetricKind::MinkowskiP && m.p < 1.0) {
    throw Error("Minkowski exponent must be >= 1");
  }
  switch (m.kind) {
    case MetricKind::Cityblock:
      return cityblock_raw(a, b) / static_cast<double>(kFeatureCount);
    case MetricKind::Euclidean:
      return euclidean_raw(a, b) / std::sqrt(static_cast<double>(kFeatureCount));
    case MetricKind::MinkowskiP:
      return minkowski_raw(a, b, m.p) /
             std::pow(static_cast<double>(kFeatureCount), 1.0 / m.p);
    case MetricKind::Cosine:
      return cosine_distance(a, b);
    case MetricKind::Correlation:
      return correlation_distance(a, b);
  }
  throw Error("unreachable metric kind");
}

double match_score(const FeatureVector& query,
                   const std::vector<FeatureVector>& templates,
                   const MetricSpec& m, Aggregation agg) {
  if (templates.empty()) throw EmptyTemplateSet();
  if (agg == Aggregation::Min) {
    double best = distance(query, templates.front(), m);
    for (std::size_t i = 1; i < templates.size(); ++i) {
      best = std::min(best, distance(query, templates[i], m));
    }
    return best;
  }
  double acc = 0.0;
  for (const FeatureVector& t : templates) acc += distance(query, t, m);
  return acc / static_cast<double>(templates.size());
}

Decision decide(double score, const Policy& policy) {
  return score < policy.threshold ? Decision::Match : Decision::NoMatch;
}

std::vector<std::vector<double>> dissimilarity_matrix(
    const std::vector<Sample>& samples, const MetricSpec& m) {
  const std::size_t n = samples.size();
  std::vector<std::vector<double>> D(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    D[i][i] = distance(samples[i].fv, samples[i].fv, m);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = distance(samples[i].fv, samples[j].fv, m);
      D[i][j] = d;
      D[j][i] = d;
    }
  }
  return D;
}

Curves sweep_scores(const std::vector<double>& genuine,
                    const std::vector<double>& impostor) {
  std::array<double, kThresholdSteps> grid;
  for (std::size_t t = 0; t < kThresholdSteps; ++t) grid[t] = threshold_at(t);

  // acc[t] = number of scores accepted at grid[t]; a score s is accepted
  // at the first threshold strictly above it.
  const auto accept_histogram = [&](const std::vector<double>& scores) {
    std::array<std::size_t, kThresholdSteps + 1> first_accept{};
    for (double s : scores) {
      const std::size_t t0 = static_cast<std::size_t>(
          std::upper_bound(grid.begin(), grid.end(), s) - grid.begin());
      ++first_accept[t0];
    }
    std::array<std::size_t, kThresholdSteps> acc{};
    std::size_t running = 0;
    for (std::size_t t = 0; t < kThresholdSteps; ++t) {
      running += first_accept[t];
      acc[t] = running;
    }
    return acc;
  };

  const auto gen_acc = accept_histogram(genuine);
  const auto imp_acc = accept_histogram(impostor);

  Curves c;
  for (std::size_t t = 0; t < kThresholdSteps; ++t) {
    c.far[t] = impostor.empty()
                   ? 0.0
                   : static_cast<double>(imp_acc[t]) /
                         static_cast<double>(impostor.size());
    c.frr[t] = genuine.empty()
                   ? 0.0
                   : 1.0 - static_cast<double>(gen_acc[t]) /
                               static_cast<double>(genuine.size());
  }
  check_monotone(c);
  return c;
}

Curves far_frr_sweep(const std::vector<std::vector<double>>& D,
                     const std::vector<std::string>& labels) {
  if (labels.size() != D.size()) {
    throw DegenerateLabels("label count does not match matrix dimension");
  }
  for (const auto& row : D) {
    if (row.size() != D.size()) {
      throw DegenerateLabels("dissimilarity matrix is not square");
    }
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& l : labels) ++counts[l];
  if (counts.size() < 2) throw DegenerateLabels("need at least two users");
  for (const auto& [user, c] : counts) {
    if (c < 2) throw DegenerateLabels("user " + user + " has fewer than 2 samples");
  }

  std::vector<double> genuine, impostor;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (i == j) continue;
      (labels[i] == labels[j] ? genuine : impostor).push_back(D[i][j]);
    }
  }
  return sweep_scores(genuine, impostor);
}

std::pair<double, double> eer(const Curves& curves) {
  std::size_t best = 0;
  double best_gap = std::fabs(curves.far[0] - curves.frr[0]);
  for (std::size_t t = 1; t < kThresholdSteps; ++t) {
    const double gap = std::fabs(curves.far[t] - curves.frr[t]);
    if (gap < best_gap) {
      best_gap = gap;
      best = t;
    }
  }
  return {(curves.far[best] + curves.frr[best]) / 2.0, threshold_at(best)};
}

VictimEval evaluate_victim(const std::vector<Sample>& samples,
                           const std::string& victim, const MetricSpec& m) {
  std::vector<std::size_t> own, other;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    (samples[i].user_id == victim ? own : other).push_back(i);
  }
  if (own.size() < 2) {
    throw DegenerateLabels("victim " + victim + " has fewer than 2 samples");
  }
  if (other.empty()) {
    throw DegenerateLabels("no impostor samples for victim " + victim);
  }

  std::vector<features::FeatureVector> raw;
  raw.reserve(own.size());
  for (std::size_t i : own) raw.push_back(samples[i].fv);
  const features::Normalizer nz = features::fit_normalizer(raw);

  std::vector<features::FeatureVector> own_n, other_n;
  own_n.reserve(own.size());
  other_n.reserve(other.size());
  for (std::size_t i : own) own_n.push_back(features::normalize(samples[i].fv, nz));
  for (std::size_t i : other) {
    other_n.push_back(features::normalize(samples[i].fv, nz));
  }

  // Ordered genuine pairs come in mirror-image twos with equal distance,
  // so the unordered half is enough for the rates.
  std::vector<double> genuine, impostor;
  genuine.reserve(own_n.size() * (own_n.size() - 1) / 2);
  impostor.reserve(own_n.size() * other_n.size());
  for (std::size_t i = 0; i < own_n.size(); ++i) {
    for (std::size_t j = i + 1; j < own_n.size(); ++j) {
      genuine.push_back(distance(own_n[i], own_n[j], m));
    }
  }
  for (const auto& imp : other_n) {
    for (const auto& v : own_n) impostor.push_back(distance(imp, v, m));
  }

  VictimEval ev;
  if (m.kind == MetricKind::Cosine) {
    const auto is_zero = [](const features::FeatureVector& v) {
      for (double x : v.values) {
        if (x != 0.0) return false;
      }
      return true;
    };
    for (const auto& v : own_n) ev.degenerate_direction_samples += is_zero(v);
    for (const auto& v : other_n) ev.degenerate_direction_samples += is_zero(v);
  }
  ev.curves = sweep_scores(genuine, impostor);
  std::tie(ev.eer, ev.threshold) = eer(ev.curves);
  return ev;
}

EvalReport evaluate_population(const std::vector<Sample>& samples,
                               const MetricSpec& m) {
  std::set<std::string> users;
  for (const Sample& s : samples) users.insert(s.user_id);
  if (users.size() < 2) throw DegenerateLabels("need at least two users");

  const std::vector<std::string> user_list(users.begin(), users.end());
  std::vector<VictimEval> evals(user_list.size());

  const std::size_t n_threads =
      std::max<std::size_t>(1, std::min<std::size_t>(
                                   std::thread::hardware_concurrency(),
                                   user_list.size()));
  std::vector<std::thread> workers;
  std::atomic<std::size_t> next{0};
  for (std::size_t w = 0; w < n_threads; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < user_list.size();
           i = next.fetch_add(1)) {
        evals[i] = evaluate_victim(samples, user_list[i], m);
      }
    });
  }
  for (auto& t : workers) t.join();

  EvalReport report;
  for (std::size_t i = 0; i < user_list.size(); ++i) {
    report.per_user[user_list[i]] = evals[i];
    report.mean_eer += evals[i].eer;
    for (std::size_t t = 0; t < kThresholdSteps; ++t) {
      report.mean_curves.far[t] += evals[i].curves.far[t];
      report.mean_curves.frr[t] += evals[i].curves.frr[t];
    }
  }
  const double inv = 1.0 / static_cast<double>(user_list.size());
  report.mean_eer *= inv;
  for (std::size_t t = 0; t < kThresholdSteps; ++t) {
    report.mean_curves.far[t] *= inv;
    report.mean_curves.frr[t] *= inv;
  }
  return report;
}

}  // namespace wearauth::decision
