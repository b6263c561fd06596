#include "atlantis/core/manifest.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <fstream>
#include <sstream>

#include "atlantis/core/error.hpp"
#include "atlantis/core/hash.hpp"

namespace atlantis::core {

namespace {

using nlohmann::json;

constexpr const char* kKindNames[] = {
    "source_image", "depth",       "caption", "triplet",     "generated_image",
    "uncertainty",  "mask",        "dataset_pair", "eval_result", "checkpoint",
};

/// Appends one line under an advisory lock, as a single write call.
void locked_append_line(const std::filesystem::path& path, const std::string& line) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0) fail(Errc::io_failure, "cannot open " + path.string());
  if (::flock(fd, LOCK_EX) != 0) {
    ::close(fd);
    fail(Errc::io_failure, "cannot lock " + path.string());
  }
  const ssize_t written = ::write(fd, line.data(), line.size());
  ::flock(fd, LOCK_UN);
  ::close(fd);
  if (written != static_cast<ssize_t>(line.size()))
    fail(Errc::io_failure, "short write to " + path.string());
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::missing_file, path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

ManifestRecord parse_line(const std::string& line, size_t lineno) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    fail(Errc::parse_failure,
         "manifest line " + std::to_string(lineno) + ": " + e.what());
  }
  try {
    return ManifestRecord::from_json(j);
  } catch (const json::exception& e) {
    fail(Errc::parse_failure,
         "manifest line " + std::to_string(lineno) + ": " + e.what());
  }
}

}  // namespace

const char* to_string(RecordKind kind) {
  return kKindNames[static_cast<size_t>(kind)];
}

RecordKind record_kind_from_string(const std::string& name) {
  for (size_t i = 0; i < std::size(kKindNames); ++i)
    if (name == kKindNames[i]) return static_cast<RecordKind>(i);
  fail(Errc::parse_failure, "unknown record kind: " + name);
}

json ManifestRecord::to_json() const {
  return json{{"id", id},
              {"kind", to_string(kind)},
              {"paths", paths},
              {"sha256", sha256},
              {"params", params},
              {"created_at", created_at}};
}

ManifestRecord ManifestRecord::from_json(const json& j) {
  ManifestRecord rec;
  rec.id = j.at("id").get<std::string>();
  rec.kind = record_kind_from_string(j.at("kind").get<std::string>());
  rec.paths = j.at("paths").get<std::map<std::string, std::string>>();
  rec.sha256 = j.at("sha256").get<std::map<std::string, std::string>>();
  rec.params = j.value("params", json::object());
  rec.created_at = j.value("created_at", "");
  return rec;
}

Manifest::Manifest(std::filesystem::path path, bool create) : path_(std::move(path)) {
  if (std::filesystem::exists(path_)) {
    records_ = manifest_read(path_);
    for (size_t i = 0; i < records_.size(); ++i) index_[records_[i].id] = i;
  } else if (create) {
    if (path_.has_parent_path())
      std::filesystem::create_directories(path_.parent_path());
    std::ofstream touch(path_, std::ios::app);
    if (!touch) fail(Errc::io_failure, "cannot create " + path_.string());
  } else {
    fail(Errc::missing_file, path_.string());
  }
}

const ManifestRecord* Manifest::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &records_[it->second];
}

void Manifest::append(ManifestRecord record) {
  if (record.id.empty()) fail(Errc::invalid_config, "record id must be nonempty");
  if (contains(record.id)) fail(Errc::duplicate_id, record.id);
  locked_append_line(path_, record.to_json().dump() + "\n");
  index_[record.id] = records_.size();
  records_.push_back(std::move(record));
}

std::filesystem::path Manifest::resolve(const std::string& relative) const {
  return dir() / relative;
}

void manifest_append(const std::filesystem::path& manifest_path,
                     const ManifestRecord& record) {
  Manifest manifest(manifest_path);
  manifest.append(record);
}

std::vector<ManifestRecord> manifest_read(const std::filesystem::path& manifest_path) {
  std::vector<ManifestRecord> records;
  const auto lines = read_lines(manifest_path);
  records.reserve(lines.size());
  for (size_t i = 0; i < lines.size(); ++i)
    records.push_back(parse_line(lines[i], i + 1));
  return records;
}

ValidationReport manifest_validate(const std::filesystem::path& manifest_path) {
  const auto records = manifest_read(manifest_path);
  const auto dir = manifest_path.parent_path();
  ValidationReport report;
  std::map<std::string, size_t> seen;
  for (const auto& rec : records) {
    ++report.counts[rec.kind];
    if (auto [it, inserted] = seen.emplace(rec.id, 1); !inserted) {
      report.violations.push_back({rec.id, "duplicate_id", "id appears more than once"});
      continue;
    }
    for (const auto& [role, rel] : rec.paths) {
      const auto full = dir / rel;
      if (!std::filesystem::exists(full)) {
        report.violations.push_back({rec.id, "dangling_path", role + " -> " + rel});
        continue;
      }
      auto digest_it = rec.sha256.find(role);
      if (digest_it != rec.sha256.end()) {
        const auto actual = sha256_file_hex(full);
        if (actual != digest_it->second)
          report.violations.push_back({rec.id, "digest_mismatch", role + " -> " + rel});
      }
    }
  }
  return report;
}

std::string manifest_file_digest(const std::filesystem::path& manifest_path) {
  return sha256_file_hex(manifest_path);
}

}  // namespace atlantis::core
