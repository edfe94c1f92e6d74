#pragma once

#include <filesystem>
#include <string>
#include <sys/types.h>

#include "voicesearch/common/bytes.hpp"

namespace voicesearch {

// Reads a whole file. Throws Error(io) when the file cannot be opened.
Bytes read_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

// Writes to "<path>.tmp.<pid>", fsyncs, renames over path, then fsyncs the
// parent directory. Readers observe either the old or the new content.
void write_file_atomic(const std::filesystem::path& path, ByteView data, mode_t mode = 0644);
void write_file_atomic(const std::filesystem::path& path, std::string_view data,
                       mode_t mode = 0644);

// Exclusive advisory lock (flock) held for the lifetime of the object.
// Throws Error(locked) if another process or descriptor holds it.
class FileLock {
 public:
  explicit FileLock(const std::filesystem::path& path);
  ~FileLock();

  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;
  FileLock(FileLock&& other) noexcept;
  FileLock& operator=(FileLock&& other) noexcept;

 private:
  int fd_ = -1;
};

}  // namespace voicesearch
