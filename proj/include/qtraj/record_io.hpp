#ifndef QTRAJ_RECORD_IO_HPP
#define QTRAJ_RECORD_IO_HPP

#include <filesystem>

#include "qtraj/trajectory.hpp"

namespace qtraj {

/// Record file layout: one header line
///   #qtraj-record v1 model=<hash> seed=<u64> dim=<d>
/// followed by one outcome label per line. Plain text for diffability.
void save_record(const TrajectoryRecord& record, const std::filesystem::path& path);

std::string record_to_text(const TrajectoryRecord& record);

TrajectoryRecord load_record(const std::filesystem::path& path);

TrajectoryRecord parse_record_text(const std::string& text);

}  // namespace qtraj

#endif
