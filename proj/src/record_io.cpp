#include "qtraj/record_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <sstream>

#include "qtraj/errors.hpp"
#include "qtraj/io_util.hpp"

namespace qtraj {

std::string record_to_text(const TrajectoryRecord& record) {
  std::ostringstream out;
  out << "#qtraj-record v1 model=" << record.model_hash << " seed=" << record.seed
      << " dim=" << record.dim << "\n";
  for (const auto& label : record.outcomes) {
    out << label << "\n";
  }
  return out.str();
}

void save_record(const TrajectoryRecord& record, const std::filesystem::path& path) {
  write_file_atomic(path, record_to_text(record));
}

TrajectoryRecord parse_record_text(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header)) throw IoError("record file is empty");

  TrajectoryRecord record;
  char hash[64] = {0};
  std::uint64_t seed = 0;
  long long dim = 0;
  if (std::sscanf(header.c_str(), "#qtraj-record v1 model=%63s seed=%" SCNu64 " dim=%lld",
                  hash, &seed, &dim) != 3 ||
      dim <= 0) {
    throw IoError("malformed record header: '" + header + "'");
  }
  // sscanf %s stops at whitespace, so strip anything glued past the hash field.
  std::string hash_str(hash);
  if (const auto pos = hash_str.find(' '); pos != std::string::npos) {
    hash_str.resize(pos);
  }
  record.model_hash = hash_str;
  record.seed = seed;
  record.dim = static_cast<Index>(dim);

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    record.outcomes.push_back(line);
  }
  return record;
}

TrajectoryRecord load_record(const std::filesystem::path& path) {
  return parse_record_text(read_file(path));
}

}  // namespace qtraj
