#include "wearauth/service.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cctype>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wearauth/errors.hpp"
#include "wearauth/pipeline.hpp"

namespace wearauth::service {

using nlohmann::json;

namespace {

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

// Filesystem-safe encoding of a user id: alphanumerics, '-' and '_' pass
// through, everything else becomes %XX.
std::string sanitize_user_id(const std::string& user_id) {
  std::string out;
  for (unsigned char c : user_id) {
    if (std::isalnum(c) || c == '-' || c == '_') {
      out.push_back(static_cast<char>(c));
    } else {
      char buf[4];
      std::snprintf(buf, sizeof(buf), "%%%02X", c);
      out += buf;
    }
  }
  return out;
}

json profile_to_json(const UserProfile& p) {
  json templates = json::array();
  for (const TemplateEntry& t : p.templates) {
    templates.push_back(json{{"t_start", t.t_start},
                             {"t_end", t.t_end},
                             {"values", t.fv.values}});
  }
  return json{{"format_version", ProfileStore::kFormatVersion},
              {"user_id", p.user_id},
              {"created_at", p.created_at},
              {"updated_at", p.updated_at},
              {"templates", templates}};
}

UserProfile profile_from_json(const json& j) {
  if (j.value("format_version", -1) != ProfileStore::kFormatVersion) {
    throw StoreError("unsupported profile format version");
  }
  UserProfile p;
  p.user_id = j.at("user_id").get<std::string>();
  p.created_at = j.at("created_at").get<std::int64_t>();
  p.updated_at = j.at("updated_at").get<std::int64_t>();
  for (const json& tj : j.at("templates")) {
    TemplateEntry t;
    t.t_start = tj.at("t_start").get<double>();
    t.t_end = tj.at("t_end").get<double>();
    const auto& vals = tj.at("values");
    if (vals.size() != features::kFeatureCount) {
      throw StoreError("template has wrong feature count");
    }
    for (std::size_t i = 0; i < features::kFeatureCount; ++i) {
      t.fv.values[i] = vals[i].get<double>();
    }
    p.templates.push_back(std::move(t));
  }
  p.refit_normalizer();
  return p;
}

}  // namespace

void UserProfile::refit_normalizer() {
  std::vector<features::FeatureVector> fvs;
  fvs.reserve(templates.size());
  for (const TemplateEntry& t : templates) fvs.push_back(t.fv);
  normalizer = features::fit_normalizer(fvs);
}

ProfileStore::ProfileStore(const std::filesystem::path& dir) : dir_(dir) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path ProfileStore::path_for(const std::string& user_id) const {
  return dir_ / (sanitize_user_id(user_id) + ".json");
}

std::optional<UserProfile> ProfileStore::load(const std::string& user_id) const {
  const auto path = path_for(user_id);
  std::ifstream in(path);
  if (!in) return std::nullopt;
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw StoreError("corrupt profile file " + path.string());
  return profile_from_json(j);
}

void ProfileStore::save(const UserProfile& profile) {
  const auto path = path_for(profile.user_id);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError("cannot write " + tmp);
    out << profile_to_json(profile).dump(2) << '\n';
    out.flush();
    if (!out) throw StoreError("short write to " + tmp);
  }
  // rename is atomic on POSIX: readers see either the old or new profile.
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw StoreError("rename failed: " + ec.message());
}

void ProfileStore::remove(const std::string& user_id) {
  std::filesystem::remove(path_for(user_id));
}

bool ProfileStore::contains(const std::string& user_id) const {
  return std::filesystem::exists(path_for(user_id));
}

std::vector<std::string> ProfileStore::user_ids() const {
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("user_id")) continue;
    ids.push_back(j["user_id"].get<std::string>());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

AuthService::AuthService(decision::Policy policy,
                         std::shared_ptr<ProfileStore> store)
    : policy_(std::move(policy)), store_(std::move(store)) {}

std::mutex& AuthService::user_mutex(const std::string& user_id) {
  std::lock_guard<std::mutex> lock(mu_);
  auto& slot = user_mutexes_[user_id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

UserProfile AuthService::enroll(const std::string& user_id,
                                const std::vector<Window>& windows,
                                bool replace) {
  std::lock_guard<std::mutex> lock(user_mutex(user_id));
  if (store_->contains(user_id) && !replace) throw AlreadyEnrolled(user_id);
  if (windows.size() < 2) throw InsufficientWindows(windows.size());

  UserProfile profile;
  profile.user_id = user_id;
  profile.created_at = profile.updated_at = now_ms();
  for (const Window& w : windows) {
    TemplateEntry t;
    t.t_start = w.start_ts;
    t.t_end = w.end_ts;
    t.fv = pipeline::extract_window(w, policy_.maf_m);
    profile.templates.push_back(std::move(t));
  }
  while (profile.templates.size() > policy_.max_templates) {
    profile.templates.erase(profile.templates.begin());
  }
  profile.refit_normalizer();
  store_->save(profile);

  std::lock_guard<std::mutex> slock(mu_);
  sessions_[user_id] = SessionState{};
  return profile;
}

double AuthService::offline_score(const UserProfile& profile,
                                  const Window& window,
                                  const decision::Policy& policy) {
  const features::FeatureVector query = features::normalize(
      pipeline::extract_window(window, policy.maf_m), profile.normalizer);
  std::vector<features::FeatureVector> templates;
  templates.reserve(profile.templates.size());
  for (const TemplateEntry& t : profile.templates) {
    templates.push_back(features::normalize(t.fv, profile.normalizer));
  }
  return decision::match_score(query, templates, policy.metric,
                               policy.aggregation);
}

VerifyOutcome AuthService::verify(const std::string& user_id,
                                  const Window& window) {
  std::lock_guard<std::mutex> lock(user_mutex(user_id));
  const auto profile = store_->load(user_id);
  if (!profile) throw UnknownUser(user_id);

  {
    std::lock_guard<std::mutex> slock(mu_);
    if (sessions_[user_id].status == SessionStatus::Suspended) {
      throw SessionSuspended(user_id);
    }
  }

  VerifyOutcome out;
  out.score = offline_score(*profile, window, policy_);
  out.decision = decision::decide(out.score, policy_);

  std::lock_guard<std::mutex> slock(mu_);
  SessionState& st = sessions_[user_id];
  if (out.decision == decision::Decision::Match) {
    st.consecutive_failures = 0;
    st.last_verified_at = now_ms();
    if (policy_.update_after_match) {
      UserProfile updated = *profile;
      TemplateEntry t;
      t.t_start = window.start_ts;
      t.t_end = window.end_ts;
      t.fv = pipeline::extract_window(window, policy_.maf_m);
      updated.templates.push_back(std::move(t));
      while (updated.templates.size() > policy_.max_templates) {
        updated.templates.erase(updated.templates.begin());
      }
      updated.refit_normalizer();
      updated.updated_at = now_ms();
      store_->save(updated);
    }
  } else {
    ++st.consecutive_failures;
    if (st.consecutive_failures >= policy_.suspend_after) {
      st.status = SessionStatus::Suspended;
    }
    std::ofstream log(store_->dir() / "failed_attempts.log", std::ios::app);
    log << now_ms() << ' ' << user_id << ' ' << out.score << '\n';
  }
  out.session = st.status;
  return out;
}

UserProfile AuthService::update_profile(const std::string& user_id,
                                        const features::FeatureVector& fv_raw,
                                        double t_start, double t_end) {
  std::lock_guard<std::mutex> lock(user_mutex(user_id));
  auto profile = store_->load(user_id);
  if (!profile) throw NotEnrolled(user_id);

  TemplateEntry t;
  t.t_start = t_start;
  t.t_end = t_end;
  t.fv = fv_raw;
  profile->templates.push_back(std::move(t));
  while (profile->templates.size() > policy_.max_templates) {
    profile->templates.erase(profile->templates.begin());  // FIFO eviction
  }
  profile->refit_normalizer();
  profile->updated_at = now_ms();
  store_->save(*profile);
  return *profile;
}

void AuthService::reset_session(const std::string& user_id) {
  std::lock_guard<std::mutex> lock(mu_);
  sessions_[user_id] = SessionState{};
}

SessionState AuthService::session(const std::string& user_id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = sessions_.find(user_id);
  return it == sessions_.end() ? SessionState{} : it->second;
}

// ---------------------------------------------------------------------------
// TCP front end
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kMaxLineBytes = 64u << 20;

json error_reply(const std::string& code) {
  return json{{"ok", false}, {"error", code}};
}

// Rows of eight numbers -> frames; returns nullopt on any structural or
// numeric problem.
std::optional<std::vector<SensorFrame>> frames_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty()) return std::nullopt;
  std::vector<SensorFrame> frames;
  frames.reserve(rows.size());
  for (const json& row : rows) {
    if (!row.is_array() || row.size() != 8) return std::nullopt;
    double v[8];
    for (std::size_t i = 0; i < 8; ++i) {
      if (!row[i].is_number()) return std::nullopt;
      v[i] = row[i].get<double>();
      if (!std::isfinite(v[i])) return std::nullopt;
    }
    frames.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]});
  }
  return frames;
}

}  // namespace

Server::Server(std::shared_ptr<AuthService> service, const std::string& host,
               std::uint16_t port)
    : service_(std::move(service)), host_(host), port_(port) {}

Server::~Server() { stop(); }

std::string Server::handle_line(const std::string& line) {
  json req = json::parse(line, nullptr, false);
  if (req.is_discarded() || !req.is_object()) {
    return error_reply("bad_request").dump();
  }

  const decision::Policy& policy = service_->policy();
  try {
    if (!req.value("op", json()).is_string() ||
        !req.value("user", json("")).is_string()) {
      return error_reply("bad_request").dump();
    }
    const std::string op = req.value("op", "");
    const std::string user = req.value("user", "");
    if (user.empty()) return error_reply("bad_request").dump();

    if (op == "enroll") {
      const auto frames = frames_from_json(req.value("window", json::array()));
      if (!frames) return error_reply("bad_request").dump();
      Recording rec;
      rec.user_id = user;
      rec.sample_rate_hz = policy.sample_rate_hz;
      rec.frames = *frames;
      const auto windows = ingest::chunk(rec, policy.sample_size);
      const bool replace = req.value("replace", false);
      const UserProfile profile = service_->enroll(user, windows, replace);
      return json{{"ok", true}, {"templates", profile.templates.size()}}.dump();
    }
    if (op == "verify") {
      const auto frames = frames_from_json(req.value("window", json::array()));
      if (!frames || frames->size() != policy.sample_size) {
        return error_reply("bad_request").dump();
      }
      Window w;
      w.user_id = user;
      w.sample_size = frames->size();
      w.sample_rate_hz = policy.sample_rate_hz;
      w.frames = *frames;
      w.start_ts = w.frames.front().t_a;
      w.end_ts = w.frames.back().t_a;
      const VerifyOutcome out = service_->verify(user, w);
      return json{{"ok", true},
                  {"decision",
                   out.decision == decision::Decision::Match ? "match"
                                                             : "no_match"},
                  {"score", out.score},
                  {"session", out.session == SessionStatus::Active
                                  ? "active"
                                  : "suspended"}}
          .dump();
    }
    if (op == "reset") {
      service_->reset_session(user);
      return json{{"ok", true}}.dump();
    }
    return error_reply("bad_request").dump();
  } catch (const AlreadyEnrolled&) {
    return error_reply("already_enrolled").dump();
  } catch (const InsufficientWindows&) {
    return error_reply("insufficient_windows").dump();
  } catch (const UnknownUser&) {
    return error_reply("unknown_user").dump();
  } catch (const SessionSuspended&) {
    return error_reply("session_suspended").dump();
  } catch (const json::exception&) {
    return error_reply("bad_request").dump();
  } catch (const std::exception& e) {
    return json{{"ok", false}, {"error", "internal"}, {"detail", e.what()}}
        .dump();
  }
}

void Server::start() {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw BindFailure("socket: " + std::string(strerror(errno)));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port_);
  if (::inet_pton(AF_INET, host_.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw BindFailure("bad address " + host_);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    const std::string err = strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw BindFailure(host_ + ":" + std::to_string(port_) + ": " + err);
  }
  if (port_ == 0) {
    socklen_t len = sizeof(addr);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
  }
  if (::listen(listen_fd_, 16) != 0) {
    const std::string err = strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw BindFailure("listen: " + err);
  }
  running_ = true;
  accept_thread_ = std::thread([this] { accept_loop(); });
}

void Server::accept_loop() {
  while (running_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (!running_) break;
      continue;
    }
    std::lock_guard<std::mutex> lock(clients_mu_);
    if (!running_) {
      ::close(fd);
      break;
    }
    client_fds_.push_back(fd);
    client_threads_.emplace_back([this, fd] { client_loop(fd); });
  }
}

void Server::client_loop(int fd) {
  std::string buffer;
  char chunk[4096];
  for (;;) {
    const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    if (buffer.size() > kMaxLineBytes) break;

    std::size_t pos;
    while ((pos = buffer.find('\n')) != std::string::npos) {
      const std::string line = buffer.substr(0, pos);
      buffer.erase(0, pos + 1);
      if (line.empty()) continue;
      const std::string reply = handle_line(line) + "\n";
      std::size_t sent = 0;
      while (sent < reply.size()) {
        const ssize_t w = ::send(fd, reply.data() + sent, reply.size() - sent, 0);
        if (w <= 0) {
          ::close(fd);
          return;
        }
        sent += static_cast<std::size_t>(w);
      }
    }
  }
  ::close(fd);
}

void Server::stop() {
  if (!running_ && listen_fd_ < 0) return;
  running_ = false;
  if (listen_fd_ >= 0) {
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  if (accept_thread_.joinable()) accept_thread_.join();
  std::lock_guard<std::mutex> lock(clients_mu_);
  // Unblock clients sitting in recv; their loops close the fds.
  for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
  for (std::thread& t : client_threads_) {
    if (t.joinable()) t.join();
  }
  client_threads_.clear();
  client_fds_.clear();
}

// ---------------------------------------------------------------------------
// Policy file
// ---------------------------------------------------------------------------

decision::Policy load_policy_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open policy file " + path.string());

  decision::Policy p;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("policy file line " + std::to_string(line_no) +
                  ": expected key=value");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);

    const auto as_bool = [&]() {
      if (value == "true" || value == "1") return true;
      if (value == "false" || value == "0") return false;
      throw Error("policy key " + key + ": expected boolean, got " + value);
    };

    if (key == "threshold") {
      p.threshold = std::stod(value);
    } else if (key == "metric") {
      p.metric = decision::metric_from_name(value);
    } else if (key == "minkowski_p") {
      p.metric.p = std::stod(value);
    } else if (key == "sample_size") {
      p.sample_size = std::stoul(value);
    } else if (key == "maf") {
      p.maf_m = std::stoul(value);
    } else if (key == "max_templates") {
      p.max_templates = std::stoul(value);
    } else if (key == "update_after_match") {
      p.update_after_match = as_bool();
    } else if (key == "suspend_after") {
      p.suspend_after = std::stoul(value);
    } else if (key == "aggregation") {
      if (value == "mean") {
        p.aggregation = decision::Aggregation::Mean;
      } else if (value == "min") {
        p.aggregation = decision::Aggregation::Min;
      } else {
        throw Error("policy key aggregation: expected mean|min");
      }
    } else if (key == "sample_rate") {
      p.sample_rate_hz = std::stod(value);
    } else {
      throw Error("unknown policy key: " + key);
    }
  }
  if (p.threshold < 0.0 || p.threshold > 1.0) {
    throw Error("policy threshold must lie in [0,1]");
  }
  return p;
}

void save_policy_file(const decision::Policy& policy,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write policy file " + path.string());
  out << "threshold=" << policy.threshold << '\n'
      << "metric=" << decision::metric_name(policy.metric) << '\n'
      << "minkowski_p=" << policy.metric.p << '\n'
      << "sample_size=" << policy.sample_size << '\n'
      << "maf=" << policy.maf_m << '\n'
      << "max_templates=" << policy.max_templates << '\n'
      << "update_after_match=" << (policy.update_after_match ? "true" : "false")
      << '\n'
      << "suspend_after=" << policy.suspend_after << '\n'
      << "aggregation="
      << (policy.aggregation == decision::Aggregation::Mean ? "mean" : "min")
      << '\n'
      << "sample_rate=" << policy.sample_rate_hz << '\n';
}

}  // namespace wearauth::service
