#include "voicesearch/caregiver/labels.hpp"

#include "voicesearch/common/error.hpp"
#include "voicesearch/common/files.hpp"

namespace voicesearch::caregiver {

using nlohmann::json;

json label_to_json(const Label& l) {
  return json{{"word", l.word}, {"mood", l.mood}, {"background", l.background}, {"notes", l.notes}};
}

Label label_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::malformed_request, "label must be an object");
  try {
    return Label{j.value("word", std::string()), j.value("mood", std::string()),
                 j.value("background", std::string()), j.value("notes", std::string())};
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_request, std::string("label: ") + e.what());
  }
}

LabelStore::LabelStore(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) return;
  try {
    const json doc = json::parse(read_text_file(path_));
    for (const auto& [id, l] : doc.at("labels").items()) labels_.emplace(id, label_from_json(l));
  } catch (const json::exception& e) {
    throw Error(Errc::io, "unreadable label file " + path_.string() + ": " + e.what());
  }
}

void LabelStore::set(const std::string& record_id, const Label& label) {
  std::lock_guard lock(mu_);
  auto previous = labels_;
  labels_[record_id] = label;
  try {
    save();
  } catch (...) {
    labels_ = std::move(previous);
    throw;
  }
}

std::optional<Label> LabelStore::get(const std::string& record_id) const {
  std::lock_guard lock(mu_);
  if (auto it = labels_.find(record_id); it != labels_.end()) return it->second;
  return std::nullopt;
}

std::map<std::string, Label> LabelStore::all() const {
  std::lock_guard lock(mu_);
  return labels_;
}

void LabelStore::save() const {
  json labels = json::object();
  for (const auto& [id, l] : labels_) labels[id] = label_to_json(l);
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  write_file_atomic(path_, json{{"version", 1}, {"labels", std::move(labels)}}.dump(2), 0600);
}

}  // namespace voicesearch::caregiver
