#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voicesearch/caregiver/evaluation.hpp"
#include "voicesearch/caregiver/labels.hpp"
#include "voicesearch/common/random.hpp"
#include "voicesearch/keys/keyfile.hpp"
#include "voicesearch/matching/classify.hpp"
#include "voicesearch/mfcc/mfcc.hpp"
#include "voicesearch/net/http.hpp"
#include "voicesearch/server/store.hpp"

namespace voicesearch::caregiver {

struct CaregiverConfig {
  std::string server_url = "http://127.0.0.1:8750";
  std::filesystem::path key_file;
  // Holds labels.json and thresholds.json.
  std::filesystem::path state_dir;
  mfcc::MfccConfig mfcc;

  // JSON: {"server_url", "key_file", "state_dir", "mfcc"}. Relative paths
  // resolve against the config file's directory.
  static CaregiverConfig load(const std::filesystem::path& path);
};

// Thresholds saved by learn-thresholds or PUT /ui/thresholds.
std::optional<matching::Thresholds> load_thresholds(const std::filesystem::path& path);
void save_thresholds(const std::filesystem::path& path, const matching::Thresholds& t);

struct RecordView {
  server::RecordSummary summary;
  std::optional<Label> label;
};

// Either a stored record or a WAV recording that never went to the server.
struct QuerySource {
  std::optional<std::string> record_id;
  std::optional<Bytes> wav;
  std::string description;

  static QuerySource record(std::string id);
  static QuerySource wav_bytes(Bytes bytes, std::string description = "upload");
  static QuerySource wav_file(const std::filesystem::path& path);
};

struct ResultRow {
  std::string record_id;
  double distance = 0.0;
  std::optional<matching::MatchClass> match_class;
};

// Rows sorted by (distance, record_id). Sessions are values; new
// thresholds give a new view through reclassify().
struct QuerySession {
  std::string session_id;
  std::string source;
  std::optional<matching::Thresholds> thresholds;
  std::vector<ResultRow> results;
};

// Pure: no I/O of any kind.
QuerySession reclassify(const QuerySession& session, const matching::Thresholds& t);

struct FetchedAudio {
  std::string record_id;
  std::optional<Bytes> wav;
  std::optional<Errc> error;
};

class CaregiverClient {
 public:
  CaregiverClient(const keys::KeyMaterial& keys, net::Transport& transport, LabelStore& labels, RandomSource& rng,
                  mfcc::MfccConfig mfcc = {});

  std::vector<RecordView> list(const server::RecordFilter& filter = {});

  // Per-id results; tampered blobs report auth_failure.
  std::vector<FetchedAudio> fetch(std::span<const std::string> ids);
  // Throws Error(unknown_record) or Error(auth_failure).
  Bytes fetch_and_play(const std::string& record_id);

  // Throws Error(unknown_record) if the server has no such record.
  void label(const std::string& record_id, const Label& label);

  // For record sources the blob is fetched, opened and re-analysed here.
  mfcc::FeatureVector features_for(const QuerySource& source);

  // One /v1/query; decoded distances in record_id order.
  std::vector<std::pair<std::string, double>> distances(const mfcc::FeatureVector& v);

  QuerySession run_query(const QuerySource& source, const std::optional<matching::Thresholds>& thresholds);

  // Decoded distances for every unordered pair of labeled records that the
  // server still holds. Uses one query per labeled record but the last.
  std::vector<LabeledPair> labeled_pairs();

  const keys::KeyMaterial& keys() const { return keys_; }

 private:
  const keys::KeyMaterial& keys_;
  net::Transport& transport_;
  LabelStore& labels_;
  RandomSource& rng_;
  mfcc::MfccConfig mfcc_;
};

}  // namespace voicesearch::caregiver
