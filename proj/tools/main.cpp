// Command-line front end: synthetic data generation, feature extraction,
// the evaluation/identification/attack experiments, and the
// authentication server. Every experiment is seeded and its report files
// are byte-stable across reruns.
#include <CLI11.hpp>

#include <charconv>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <thread>

#include "wearauth/attacks.hpp"
#include "wearauth/decision.hpp"
#include "wearauth/errors.hpp"
#include "wearauth/identify.hpp"
#include "wearauth/ingest.hpp"
#include "wearauth/pipeline.hpp"
#include "wearauth/service.hpp"
#include "wearauth/synth.hpp"

namespace fs = std::filesystem;
using namespace wearauth;

namespace {

// Shortest round-trip decimal form, so equal doubles always print the
// same bytes.
std::string num(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void write_features_csv(const std::vector<decision::Sample>& samples,
                        const fs::path& path) {
  auto out = open_out(path);
  out << "user_id,start_ts,end_ts";
  for (std::size_t i = 0; i < features::kFeatureCount; ++i) out << ",f" << i;
  out << '\n';
  for (const auto& s : samples) {
    out << s.user_id << ',' << num(s.t_start) << ',' << num(s.t_end);
    for (double v : s.fv.values) out << ',' << num(v);
    out << '\n';
  }
}

std::vector<decision::Sample> read_features_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<decision::Sample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.rfind("user_id,", 0) == 0) continue;
    decision::Sample s;
    std::size_t field = 0;
    std::size_t start = 0;
    while (start <= line.size()) {
      const std::size_t comma = line.find(',', start);
      const std::string tok = line.substr(
          start, comma == std::string::npos ? std::string::npos : comma - start);
      if (field == 0) {
        s.user_id = tok;
      } else {
        double v = 0.0;
        const char* first = tok.data();
        auto [p, ec] = std::from_chars(first, first + tok.size(), v);
        if (ec != std::errc{} || p != first + tok.size()) {
          throw Error(path.string() + ":" + std::to_string(line_no) +
                      ": bad numeric field");
        }
        if (field == 1) {
          s.t_start = v;
        } else if (field == 2) {
          s.t_end = v;
        } else if (field - 3 < features::kFeatureCount) {
          s.fv.values[field - 3] = v;
        } else {
          throw Error(path.string() + ":" + std::to_string(line_no) +
                      ": too many fields");
        }
      }
      ++field;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (field != 3 + features::kFeatureCount) {
      throw Error(path.string() + ":" + std::to_string(line_no) +
                  ": expected " + std::to_string(3 + features::kFeatureCount) +
                  " fields");
    }
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw Error("no feature rows in " + path.string());
  return samples;
}

identify::Dataset dataset_from_samples(
    const std::vector<decision::Sample>& samples) {
  identify::Dataset d;
  std::set<std::string> users;
  for (const auto& s : samples) users.insert(s.user_id);
  std::map<std::string, int> ids;
  for (const auto& u : users) {
    ids[u] = static_cast<int>(d.class_names.size());
    d.class_names.push_back(u);
  }
  for (const auto& s : samples) {
    d.X.emplace_back(s.fv.values.begin(), s.fv.values.end());
    d.y.push_back(ids.at(s.user_id));
  }
  return d;
}

volatile std::sig_atomic_t g_stop = 0;
void handle_signal(int) { g_stop = 1; }

// ---- subcommands ----------------------------------------------------------

int cmd_synth(const synth::PopulationSpec& pop, std::size_t sessions,
              const fs::path& out_dir) {
  fs::create_directories(out_dir);
  auto manifest = open_out(out_dir / "manifest.csv");
  manifest << "user_id,session,path,seed\n";
  for (const auto& entry : synth::generate_population(pop, sessions)) {
    const std::string name =
        entry.user_id + "_s" + std::to_string(entry.session) + ".csv";
    ingest::write_recording(entry.recording, out_dir / name);
    manifest << entry.user_id << ',' << entry.session << ',' << name << ','
             << entry.session_seed << '\n';
  }
  std::cout << "wrote " << pop.n_users << " users x " << sessions
            << " sessions to " << out_dir.string() << "\n";
  return 0;
}

int cmd_ingest(const fs::path& input, const std::string& user, double rate,
               std::size_t sample_size) {
  const Recording rec = ingest::parse_recording(input, user, rate);
  std::cout << "user " << rec.user_id << ": " << rec.frames.size()
            << " frames, " << num(rec.duration_seconds()) << " s at "
            << num(rec.sample_rate_hz) << " Hz";
  if (sample_size >= 2) {
    std::cout << ", " << ingest::chunk(rec, sample_size).size()
              << " windows of " << sample_size;
  }
  std::cout << "\n";
  return 0;
}

std::vector<Recording> load_recordings(const fs::path& manifest_path,
                                       const fs::path& single_input,
                                       const std::string& user, double rate) {
  std::vector<Recording> recs;
  if (!manifest_path.empty()) {
    std::ifstream in(manifest_path);
    if (!in) throw Error("cannot open " + manifest_path.string());
    const fs::path base = manifest_path.parent_path();
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (first && line.rfind("user_id,", 0) == 0) {
        first = false;
        continue;
      }
      first = false;
      // user_id,session,path,seed
      std::vector<std::string> tok;
      std::size_t start = 0;
      while (start <= line.size()) {
        const auto comma = line.find(',', start);
        tok.push_back(line.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      if (tok.size() != 4) throw Error("manifest: expected 4 columns");
      recs.push_back(ingest::parse_recording(base / tok[2], tok[0], rate));
    }
    if (recs.empty()) throw Error("manifest lists no recordings");
  } else {
    recs.push_back(ingest::parse_recording(single_input, user, rate));
  }
  return recs;
}

int cmd_features(const fs::path& manifest, const fs::path& input,
                 const std::string& user, double rate, std::size_t sample_size,
                 std::size_t maf, const fs::path& out) {
  const auto recs = load_recordings(manifest, input, user, rate);
  const auto samples = pipeline::extract_dataset(recs, sample_size, maf);
  write_features_csv(samples, out);
  std::cout << "wrote " << samples.size() << " feature vectors to "
            << out.string() << "\n";
  return 0;
}

int cmd_eer(const fs::path& features_path, const std::string& metric_name,
            double p, std::size_t sample_size, const fs::path& out,
            fs::path curves_path) {
  auto metric = decision::metric_from_name(metric_name);
  metric.p = metric.kind == decision::MetricKind::MinkowskiP ? p : metric.p;
  const auto samples = read_features_csv(features_path);
  const auto report = decision::evaluate_population(samples, metric);

  auto out_csv = open_out(out);
  out_csv << "user_id,eer,threshold,metric,sample_size\n";
  for (const auto& [user, ev] : report.per_user) {
    out_csv << user << ',' << num(ev.eer) << ',' << num(ev.threshold) << ','
            << metric_name << ',' << sample_size << '\n';
  }
  out_csv << "MEAN," << num(report.mean_eer) << ",," << metric_name << ','
          << sample_size << '\n';

  if (curves_path.empty()) {
    curves_path = out;
    curves_path.replace_extension(".curves.csv");
  }
  auto curves_csv = open_out(curves_path);
  curves_csv << "threshold,far,frr\n";
  for (std::size_t t = 0; t < decision::kThresholdSteps; ++t) {
    curves_csv << num(decision::threshold_at(t)) << ','
               << num(report.mean_curves.far[t]) << ','
               << num(report.mean_curves.frr[t]) << '\n';
  }
  std::cout << "mean EER " << num(report.mean_eer) << " over "
            << report.per_user.size() << " users; report " << out.string()
            << ", curves " << curves_path.string() << "\n";
  return 0;
}

int cmd_identify(const fs::path& train_path, const fs::path& test_path,
                 std::size_t k, const identify::TrainConfig& cfg,
                 const std::string& scenario, const fs::path& out) {
  const auto train = dataset_from_samples(read_features_csv(train_path));
  identify::Dataset test;
  if (!test_path.empty()) test = dataset_from_samples(read_features_csv(test_path));

  const auto kind = scenario == "cv5" ? identify::ScenarioKind::SameDatasetCv5
                                      : identify::ScenarioKind::CrossDataset;
  if (kind == identify::ScenarioKind::CrossDataset && test.X.empty()) {
    throw Error("cross scenario needs --test");
  }
  if (kind == identify::ScenarioKind::CrossDataset &&
      test.class_names != train.class_names) {
    throw Error("train and test datasets list different users");
  }
  const auto res = identify::run_scenario(kind, train, test, k, cfg);

  if (!out.empty()) {
    auto csv = open_out(out);
    csv << "scenario,k,hidden,epochs,learning_rate,momentum,seed,accuracy\n";
    csv << scenario << ',' << k << ',' << cfg.hidden_sizes.front() << ','
        << cfg.epochs << ',' << num(cfg.learning_rate) << ','
        << num(cfg.momentum) << ',' << cfg.seed << ',' << num(res.accuracy)
        << '\n';
    csv << "confusion,true_user,predicted_user,count\n";
    for (std::size_t a = 0; a < res.confusion.size(); ++a) {
      for (std::size_t b = 0; b < res.confusion.size(); ++b) {
        if (res.confusion[a][b] == 0) continue;
        csv << "confusion," << train.class_names[a] << ','
            << train.class_names[b] << ',' << res.confusion[a][b] << '\n';
      }
    }
  }
  // Wall time goes to the console only; report files stay seed-stable.
  std::cout << "accuracy " << num(res.accuracy) << " (" << scenario << ", k="
            << k << "), training took " << res.train_seconds << " s\n";
  return 0;
}

int cmd_attack_stat(const fs::path& features_path, const std::string& victim,
                    const attacks::AttackConfig& cfg,
                    const std::string& metric_name, std::size_t sample_size,
                    const fs::path& out) {
  const auto metric = decision::metric_from_name(metric_name);
  const auto samples = read_features_csv(features_path);

  std::vector<std::string> victims;
  if (victim == "all") {
    std::set<std::string> users;
    for (const auto& s : samples) users.insert(s.user_id);
    victims.assign(users.begin(), users.end());
  } else {
    victims.push_back(victim);
  }

  std::ofstream csv;
  if (!out.empty()) {
    csv = open_out(out);
    csv << "victim,bins,top_bins,forged,seed,metric,sample_size,baseline_eer,"
           "baseline_threshold,accept_rate,eer_forged_only,eer_pooled\n";
  }
  for (const auto& v : victims) {
    const auto res = attacks::statistical_attack(samples, v, cfg, metric);
    const std::string row =
        v + ',' + std::to_string(cfg.bin_number) + ',' +
        std::to_string(cfg.top_bins) + ',' + std::to_string(cfg.out_number) +
        ',' + std::to_string(cfg.seed) + ',' + metric_name + ',' +
        std::to_string(sample_size) + ',' + num(res.baseline_eer) + ',' +
        num(res.baseline_threshold) + ',' + num(res.accept_rate) + ',' +
        num(res.eer_forged_only) + ',' + num(res.eer_pooled);
    if (csv.is_open()) csv << row << '\n';
    std::cout << row << "\n";
  }
  return 0;
}

int cmd_attack_imitate(const fs::path& features_path, std::uint64_t pop_seed,
                       std::size_t pop_users, double separation,
                       std::size_t victim_index, std::size_t attacker_index,
                       double alpha, std::size_t attempts,
                       std::size_t sample_size, std::size_t maf, double rate,
                       const std::string& metric_name, std::uint64_t seed,
                       const fs::path& out) {
  const auto metric = decision::metric_from_name(metric_name);
  const auto samples = read_features_csv(features_path);

  synth::PopulationSpec pop;
  pop.n_users = pop_users;
  pop.seed = pop_seed;
  pop.separation = separation;
  attacks::ImitationSpec spec{synth::sample_user_spec(pop, victim_index),
                              synth::sample_user_spec(pop, attacker_index),
                              alpha};
  const std::string victim = synth::user_id_for_index(victim_index);
  const auto res = attacks::imitation_attack(samples, victim, spec, sample_size,
                                             maf, rate, metric, attempts, seed);

  const std::string row = victim + ',' + synth::user_id_for_index(attacker_index) +
                          ',' + num(alpha) + ',' + std::to_string(attempts) +
                          ',' + std::to_string(seed) + ',' + metric_name + ',' +
                          std::to_string(sample_size) + ',' +
                          num(res.baseline_eer) + ',' +
                          num(res.baseline_threshold) + ',' +
                          num(res.accept_rate);
  if (!out.empty()) {
    auto csv = open_out(out);
    csv << "victim,attacker,alpha,attempts,seed,metric,sample_size,"
           "baseline_eer,baseline_threshold,accept_rate\n";
    csv << row << '\n';
  }
  std::cout << row << "\n";
  return 0;
}

int cmd_serve(const std::string& listen, const fs::path& store_dir,
              const fs::path& policy_path) {
  decision::Policy policy;
  if (!policy_path.empty()) policy = service::load_policy_file(policy_path);

  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw Error("--listen expects host:port");
  const std::string host = listen.substr(0, colon);
  const int port = std::stoi(listen.substr(colon + 1));
  if (port < 0 || port > 65535) throw Error("port out of range");

  auto store = std::make_shared<service::ProfileStore>(store_dir);
  auto svc = std::make_shared<service::AuthService>(policy, store);
  service::Server server(svc, host, static_cast<std::uint16_t>(port));
  server.start();
  std::cout << "listening on " << host << ":" << server.port() << std::endl;

  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  server.stop();
  std::cout << "stopped\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wrist-motion keystroke dynamics: data synthesis, continuous "
               "authentication, identification and attack evaluation"};
  app.require_subcommand(1);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic population");
  synth::PopulationSpec pop;
  std::size_t sessions = 8;
  fs::path synth_out = "data";
  synth_cmd->add_option("--users", pop.n_users, "number of users");
  synth_cmd->add_option("--sessions", sessions, "sessions per user");
  synth_cmd->add_option("--duration", pop.duration_s, "session length, seconds");
  synth_cmd->add_option("--separation", pop.separation, "between-user dispersion scale");
  synth_cmd->add_option("--seed", pop.seed, "population seed");
  synth_cmd->add_option("--rate", pop.sample_rate_hz, "sample rate, Hz");
  synth_cmd->add_option("--out", synth_out, "output directory");

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "validate a recording CSV");
  fs::path ingest_input;
  std::string ingest_user = "anonymous";
  double ingest_rate = 100.0;
  std::size_t ingest_ss = 0;
  ingest_cmd->add_option("--input", ingest_input, "recording CSV")->required();
  ingest_cmd->add_option("--user", ingest_user, "user id");
  ingest_cmd->add_option("--rate", ingest_rate, "sample rate, Hz");
  ingest_cmd->add_option("--sample-size", ingest_ss, "also report window count");

  // features
  auto* feat_cmd = app.add_subcommand("features", "extract feature vectors");
  fs::path feat_manifest, feat_input, feat_out = "features.csv";
  std::string feat_user = "anonymous";
  double feat_rate = 100.0;
  std::size_t feat_ss = 1500, feat_maf = 9;
  feat_cmd->add_option("--manifest", feat_manifest, "population manifest.csv");
  feat_cmd->add_option("--input", feat_input, "single recording CSV");
  feat_cmd->add_option("--user", feat_user, "user id for --input");
  feat_cmd->add_option("--rate", feat_rate, "sample rate, Hz");
  feat_cmd->add_option("--sample-size", feat_ss, "frames per window");
  feat_cmd->add_option("--maf", feat_maf, "moving-average filter length");
  feat_cmd->add_option("--out", feat_out, "output features CSV");

  // eer
  auto* eer_cmd = app.add_subcommand("eer", "per-user EER evaluation");
  fs::path eer_features, eer_out = "eer.csv", eer_curves;
  std::string eer_metric = "cityblock";
  double eer_p = 5.0;
  std::size_t eer_ss = 1500;
  eer_cmd->add_option("--features", eer_features, "features CSV")->required();
  eer_cmd->add_option("--metric", eer_metric,
                      "euclidean|cosine|correlation|cityblock|minkowski");
  eer_cmd->add_option("--p", eer_p, "Minkowski exponent");
  eer_cmd->add_option("--sample-size", eer_ss, "window size label for the report");
  eer_cmd->add_option("--out", eer_out, "report CSV");
  eer_cmd->add_option("--curves", eer_curves, "FAR/FRR curves CSV");

  // identify
  auto* id_cmd = app.add_subcommand("identify", "MLP insider identification");
  fs::path id_train, id_test, id_out;
  std::size_t id_k = 5;
  identify::TrainConfig id_cfg;
  std::size_t id_hidden = 64;
  std::string id_scenario = "cross";
  id_cmd->add_option("--train", id_train, "training features CSV")->required();
  id_cmd->add_option("--test", id_test, "test features CSV");
  id_cmd->add_option("--k", id_k, "training samples per user");
  id_cmd->add_option("--hidden", id_hidden, "hidden layer width");
  id_cmd->add_option("--epochs", id_cfg.epochs, "training epochs");
  id_cmd->add_option("--lr", id_cfg.learning_rate, "learning rate");
  id_cmd->add_option("--momentum", id_cfg.momentum, "momentum");
  id_cmd->add_option("--seed", id_cfg.seed, "init seed");
  id_cmd->add_option("--scenario", id_scenario, "cross|cv5");
  id_cmd->add_option("--out", id_out, "report CSV");

  // attack-stat
  auto* stat_cmd = app.add_subcommand("attack-stat", "histogram forgery attack");
  fs::path stat_features, stat_out;
  std::string stat_victim;
  attacks::AttackConfig stat_cfg;
  std::string stat_metric = "cityblock";
  std::size_t stat_ss = 1500;
  stat_cmd->add_option("--features", stat_features, "features CSV")->required();
  stat_cmd->add_option("--victim", stat_victim, "victim user id, or 'all'")
      ->required();
  stat_cmd->add_option("--bins", stat_cfg.bin_number, "histogram bins");
  stat_cmd->add_option("--top", stat_cfg.top_bins, "top bins used");
  stat_cmd->add_option("--forged", stat_cfg.out_number, "forged samples");
  stat_cmd->add_option("--seed", stat_cfg.seed, "attack seed");
  stat_cmd->add_option("--metric", stat_metric, "distance metric");
  stat_cmd->add_option("--sample-size", stat_ss, "window size label");
  stat_cmd->add_option("--out", stat_out, "report CSV");

  // attack-imitate
  auto* imit_cmd = app.add_subcommand("attack-imitate", "imitation attack");
  fs::path imit_features, imit_out;
  std::uint64_t imit_pop_seed = 42, imit_seed = 3;
  std::size_t imit_users = 30, imit_victim = 0, imit_attacker = 5;
  double imit_sep = 1.0, imit_alpha = 0.5, imit_rate = 100.0;
  std::size_t imit_attempts = 50, imit_ss = 1500, imit_maf = 9;
  std::string imit_metric = "cityblock";
  imit_cmd->add_option("--features", imit_features, "features CSV")->required();
  imit_cmd->add_option("--pop-seed", imit_pop_seed, "population seed");
  imit_cmd->add_option("--users", imit_users, "population size");
  imit_cmd->add_option("--separation", imit_sep, "population separation");
  imit_cmd->add_option("--victim-index", imit_victim, "victim user index");
  imit_cmd->add_option("--attacker-index", imit_attacker, "attacker user index");
  imit_cmd->add_option("--alpha", imit_alpha, "imitation fidelity [0,1]");
  imit_cmd->add_option("--attempts", imit_attempts, "attacker windows");
  imit_cmd->add_option("--sample-size", imit_ss, "frames per window");
  imit_cmd->add_option("--maf", imit_maf, "filter length");
  imit_cmd->add_option("--rate", imit_rate, "sample rate, Hz");
  imit_cmd->add_option("--metric", imit_metric, "distance metric");
  imit_cmd->add_option("--seed", imit_seed, "attack seed");
  imit_cmd->add_option("--out", imit_out, "report CSV");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "run the authentication server");
  std::string listen = "127.0.0.1:7070";
  fs::path store_dir = "store", policy_file;
  serve_cmd->add_option("--listen", listen, "host:port (port 0 = ephemeral)");
  serve_cmd->add_option("--store", store_dir, "profile store directory");
  serve_cmd->add_option("--policy", policy_file, "policy file (key=value)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) return cmd_synth(pop, sessions, synth_out);
    if (*ingest_cmd) return cmd_ingest(ingest_input, ingest_user, ingest_rate, ingest_ss);
    if (*feat_cmd) {
      if (feat_manifest.empty() == feat_input.empty()) {
        throw Error("features: give exactly one of --manifest / --input");
      }
      return cmd_features(feat_manifest, feat_input, feat_user, feat_rate,
                          feat_ss, feat_maf, feat_out);
    }
    if (*eer_cmd) return cmd_eer(eer_features, eer_metric, eer_p, eer_ss, eer_out, eer_curves);
    if (*id_cmd) {
      id_cfg.hidden_sizes = {id_hidden};
      return cmd_identify(id_train, id_test, id_k, id_cfg, id_scenario, id_out);
    }
    if (*stat_cmd) return cmd_attack_stat(stat_features, stat_victim, stat_cfg,
                                          stat_metric, stat_ss, stat_out);
    if (*imit_cmd) {
      return cmd_attack_imitate(imit_features, imit_pop_seed, imit_users,
                                imit_sep, imit_victim, imit_attacker, imit_alpha,
                                imit_attempts, imit_ss, imit_maf, imit_rate,
                                imit_metric, imit_seed, imit_out);
    }
    if (*serve_cmd) return cmd_serve(listen, store_dir, policy_file);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
