#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

namespace voicesearch::caregiver {

struct Label {
  std::string word;
  std::string mood;
  std::string background;
  std::string notes;

  friend bool operator==(const Label&, const Label&) = default;
};

nlohmann::json label_to_json(const Label& l);
Label label_from_json(const nlohmann::json& j);

// record_id -> Label, kept in one JSON document that is rewritten
// atomically on every change. Never sent to the server.
class LabelStore {
 public:
  // A missing file is an empty store.
  explicit LabelStore(std::filesystem::path path);

  void set(const std::string& record_id, const Label& label);
  std::optional<Label> get(const std::string& record_id) const;
  std::map<std::string, Label> all() const;

 private:
  void save() const;

  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::map<std::string, Label> labels_;
};

}  // namespace voicesearch::caregiver
