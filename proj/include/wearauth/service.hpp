#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "wearauth/decision.hpp"
#include "wearauth/types.hpp"

namespace wearauth::service {

// An enrolled user: raw (pre-normalization) templates plus the cached
// normalization bounds derived from them.
struct TemplateEntry {
  double t_start = 0.0;
  double t_end = 0.0;
  features::FeatureVector fv;
};

struct UserProfile {
  std::string user_id;
  std::vector<TemplateEntry> templates;
  features::Normalizer normalizer;
  std::int64_t created_at = 0;  // ms since epoch
  std::int64_t updated_at = 0;

  void refit_normalizer();
};

// Directory-backed profile store, one JSON file per user, written with a
// temp-file-then-rename step so a crash mid-write never corrupts state.
class ProfileStore {
 public:
  explicit ProfileStore(const std::filesystem::path& dir);

  std::optional<UserProfile> load(const std::string& user_id) const;
  void save(const UserProfile& profile);
  void remove(const std::string& user_id);
  bool contains(const std::string& user_id) const;
  std::vector<std::string> user_ids() const;

  const std::filesystem::path& dir() const { return dir_; }

  static constexpr int kFormatVersion = 1;

 private:
  std::filesystem::path dir_;
  std::filesystem::path path_for(const std::string& user_id) const;
};

enum class SessionStatus { Active, Suspended };

struct SessionState {
  SessionStatus status = SessionStatus::Active;
  std::size_t consecutive_failures = 0;
  std::int64_t last_verified_at = 0;
};

struct VerifyOutcome {
  decision::Decision decision = decision::Decision::NoMatch;
  double score = 1.0;
  SessionStatus session = SessionStatus::Active;
};

// Enrollment, verification and profile-update flow over a persistent
// store. Per-user mutation is serialized; distinct users may proceed
// concurrently.
class AuthService {
 public:
  AuthService(decision::Policy policy, std::shared_ptr<ProfileStore> store);

  // Extracts and stores raw templates from >= 2 windows, fits the
  // normalizer and persists atomically. Throws AlreadyEnrolled (unless
  // replace) and InsufficientWindows.
  UserProfile enroll(const std::string& user_id,
                     const std::vector<Window>& windows, bool replace = false);

  // window -> filter -> extract -> normalize (user bounds) -> score ->
  // threshold decision. A no-match increments the failure count and
  // suspends the session at the policy limit; a match triggers the
  // profile-update policy. Throws UnknownUser / SessionSuspended.
  VerifyOutcome verify(const std::string& user_id, const Window& window);

  // Appends a raw feature vector, evicts the oldest template beyond
  // max_templates, refits bounds, persists. Throws NotEnrolled.
  UserProfile update_profile(const std::string& user_id,
                             const features::FeatureVector& fv_raw,
                             double t_start, double t_end);

  // Clears suspension and failure count (re-login).
  void reset_session(const std::string& user_id);

  SessionState session(const std::string& user_id) const;
  const decision::Policy& policy() const { return policy_; }

  // Offline equivalent of verify's scoring for an enrolled profile;
  // the service decision is exactly this value thresholded.
  static double offline_score(const UserProfile& profile, const Window& window,
                              const decision::Policy& policy);

 private:
  std::mutex& user_mutex(const std::string& user_id);

  decision::Policy policy_;
  std::shared_ptr<ProfileStore> store_;
  mutable std::mutex mu_;  // guards sessions_ and user_mutexes_
  std::map<std::string, SessionState> sessions_;
  std::map<std::string, std::unique_ptr<std::mutex>> user_mutexes_;
};

// Line-oriented TCP front end: one JSON object per line, one decision per
// verify request. Responses are single-line JSON; malformed input gets
// {"ok":false,"error":"bad_request"} and the connection stays open.
class Server {
 public:
  Server(std::shared_ptr<AuthService> service, const std::string& host,
         std::uint16_t port);
  ~Server();

  // Binds and starts the accept loop. Throws BindFailure.
  void start();
  void stop();

  std::uint16_t port() const { return port_; }

  // Exposed for tests: handles one request line, returns the reply line.
  std::string handle_line(const std::string& line);

 private:
  void accept_loop();
  void client_loop(int fd);

  std::shared_ptr<AuthService> service_;
  std::string host_;
  std::uint16_t port_;
  int listen_fd_ = -1;
  std::thread accept_thread_;
  std::mutex clients_mu_;
  std::vector<std::thread> client_threads_;
  std::vector<int> client_fds_;
  std::atomic<bool> running_{false};
};

// Flat key=value policy file (threshold, metric, sample_size, maf,
// max_templates, update_after_match, suspend_after).
decision::Policy load_policy_file(const std::filesystem::path& path);
void save_policy_file(const decision::Policy& policy,
                      const std::filesystem::path& path);

}  // namespace wearauth::service
