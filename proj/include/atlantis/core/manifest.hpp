#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace atlantis::core {

enum class RecordKind {
  source_image,
  depth,
  caption,
  triplet,
  generated_image,
  uncertainty,
  mask,
  dataset_pair,
  eval_result,
  checkpoint,
};

const char* to_string(RecordKind kind);
RecordKind record_kind_from_string(const std::string& name);

/// One line of the append-only JSON-Lines ledger. Paths are relative to the
/// manifest's directory; ids are content-derived.
struct ManifestRecord {
  std::string id;
  RecordKind kind = RecordKind::source_image;
  std::map<std::string, std::string> paths;    // role -> relative path
  std::map<std::string, std::string> sha256;   // role -> hex digest
  nlohmann::json params = nlohmann::json::object();
  std::string created_at;  // ISO-8601 UTC

  nlohmann::json to_json() const;
  static ManifestRecord from_json(const nlohmann::json& j);
};

struct Violation {
  std::string record_id;
  std::string kind;  // duplicate_id | dangling_path | digest_mismatch
  std::string detail;
};

struct ValidationReport {
  std::map<RecordKind, size_t> counts;
  std::vector<Violation> violations;
  bool consistent() const { return violations.empty(); }
};

/// Append/read handle with cached ids. Writers to the same file are
/// serialized through an advisory flock; each record is written with a
/// single write call so readers always see a prefix of complete lines.
class Manifest {
public:
  explicit Manifest(std::filesystem::path path, bool create = true);

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path dir() const { return path_.parent_path(); }

  bool contains(const std::string& id) const { return index_.count(id) > 0; }
  const std::vector<ManifestRecord>& records() const { return records_; }
  const ManifestRecord* find(const std::string& id) const;

  void append(ManifestRecord record);

  /// Resolves a record-relative path against the manifest directory.
  std::filesystem::path resolve(const std::string& relative) const;

private:
  std::filesystem::path path_;
  std::vector<ManifestRecord> records_;
  std::map<std::string, size_t> index_;
};

void manifest_append(const std::filesystem::path& manifest_path,
                     const ManifestRecord& record);
std::vector<ManifestRecord> manifest_read(const std::filesystem::path& manifest_path);
ValidationReport manifest_validate(const std::filesystem::path& manifest_path);

std::string manifest_file_digest(const std::filesystem::path& manifest_path);

}  // namespace atlantis::core
