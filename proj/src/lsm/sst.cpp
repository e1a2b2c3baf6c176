#include "umjoin/lsm/sst.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "umjoin/core/codec.hpp"
#include "umjoin/core/error.hpp"

namespace umjoin::lsm {
namespace {

std::string errno_message(const std::string& op, const std::filesystem::path& path) {
  return op + " " + path.string() + ": " + std::strerror(errno);
}

}  // namespace

RandomAccessFile::RandomAccessFile(const std::filesystem::path& path) : path_(path) {
  fd_ = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd_ < 0) throw StorageError(errno_message("open", path));
  struct stat st {};
  if (::fstat(fd_, &st) != 0) {
    const auto msg = errno_message("stat", path);
    ::close(fd_);
    throw StorageError(msg);
  }
  size_ = static_cast<std::uint64_t>(st.st_size);
}

RandomAccessFile::~RandomAccessFile() {
  if (fd_ >= 0) ::close(fd_);
}

RandomAccessFile::RandomAccessFile(RandomAccessFile&& other) noexcept
    : path_(std::move(other.path_)), fd_(other.fd_), size_(other.size_) {
  other.fd_ = -1;
}

RandomAccessFile& RandomAccessFile::operator=(RandomAccessFile&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    path_ = std::move(other.path_);
    fd_ = other.fd_;
    size_ = other.size_;
    other.fd_ = -1;
  }
  return *this;
}

std::string RandomAccessFile::read(std::uint64_t offset, std::size_t n) const {
  if (offset > size_ || n > size_ - offset) {
    throw CorruptionError(path_.string(), "read beyond end of file");
  }
  std::string out(n, '\0');
  std::size_t done = 0;
  while (done < n) {
    const auto r = ::pread(fd_, out.data() + done, n - done, static_cast<off_t>(offset + done));
    if (r < 0) {
      if (errno == EINTR) continue;
      throw StorageError(errno_message("read", path_));
    }
    if (r == 0) throw CorruptionError(path_.string(), "unexpected end of file");
    done += static_cast<std::size_t>(r);
  }
  return out;
}

SstBuilder::SstBuilder(std::filesystem::path path, std::uint32_t level, SstOptions options)
    : path_(std::move(path)), level_(level), options_(options) {
  tmp_path_ = path_;
  tmp_path_ += ".tmp";
  fd_ = ::open(tmp_path_.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd_ < 0) throw StorageError(errno_message("create", tmp_path_));
}

SstBuilder::~SstBuilder() {
  if (!finished_) abandon();
}

void SstBuilder::write(std::string_view bytes) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    const auto w = ::write(fd_, bytes.data() + done, bytes.size() - done);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw StorageError(errno_message("write", tmp_path_));
    }
    done += static_cast<std::size_t>(w);
  }
  offset_ += bytes.size();
}

void SstBuilder::add(std::string_view key, const std::vector<StoredTuple>& tuples) {
  if (!keys_.empty() && !(last_key_ < key)) throw std::logic_error("sst keys must be strictly increasing");
  append_record(pending_, key, tuples);
  pending_last_key_.assign(key);
  last_key_.assign(key);
  keys_.emplace_back(key);
  // The record that crosses block_bytes stays in its block.
  if (pending_.size() >= options_.block_bytes) flush_block();
}

void SstBuilder::flush_block() {
  if (pending_.empty()) return;
  put_u32(pending_, crc32(pending_));
  IndexEntry e{pending_last_key_, offset_, static_cast<std::uint32_t>(pending_.size())};
  write(pending_);
  index_.push_back(std::move(e));
  pending_.clear();
}

std::uint64_t SstBuilder::finish() {
  if (keys_.empty()) throw std::logic_error("cannot finish an empty sst");
  flush_block();

  BloomFilter bloom(keys_.size(), options_.bloom_bits_per_key, options_.bloom_hashes);
  for (const auto& k : keys_) bloom.add(k);

  Footer footer;
  footer.level = level_;
  const std::string index = encode_index(index_);
  footer.index_offset = offset_;
  footer.index_len = static_cast<std::uint32_t>(index.size());
  write(index);
  const std::string bloom_block = bloom.encode();
  footer.bloom_offset = offset_;
  footer.bloom_len = static_cast<std::uint32_t>(bloom_block.size());
  write(bloom_block);
  write(encode_footer(footer));

  if (::close(fd_) != 0) {
    fd_ = -1;
    throw StorageError(errno_message("close", tmp_path_));
  }
  fd_ = -1;
  if (::rename(tmp_path_.c_str(), path_.c_str()) != 0) throw StorageError(errno_message("rename", tmp_path_));
  finished_ = true;
  return offset_;
}

void SstBuilder::abandon() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
  ::unlink(tmp_path_.c_str());
  finished_ = true;
}

SstReader::SstReader(std::filesystem::path path, std::uint64_t file_seq)
    : path_(std::move(path)), file_seq_(file_seq), file_(path_) {
  const auto name = path_.string();
  if (file_.size() < kFooterBytes) throw CorruptionError(name, "file shorter than footer");
  try {
    footer_ = decode_footer(file_.read(file_.size() - kFooterBytes, kFooterBytes));
    index_ = decode_index(file_.read(footer_.index_offset, footer_.index_len));
    bloom_ = BloomFilter::decode(file_.read(footer_.bloom_offset, footer_.bloom_len));
  } catch (const DecodeError& e) {
    throw CorruptionError(name, e.what());
  }
  if (index_.empty()) throw CorruptionError(name, "empty block index");
  for (std::size_t i = 1; i < index_.size(); ++i) {
    if (index_[i].last_key < index_[i - 1].last_key) throw CorruptionError(name, "index keys out of order");
  }
  const auto first = read_block(0);
  if (first.records.empty()) throw CorruptionError(name, "empty first data block");
  min_key_ = first.records.front().key;
}

bool SstReader::may_contain(std::string_view key) const { return bloom_.may_contain(key); }

std::optional<std::size_t> SstReader::block_for(std::string_view key) const {
  if (key < std::string_view(min_key_) || std::string_view(max_key()) < key) return std::nullopt;
  std::size_t lo = 0;
  std::size_t hi = index_.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (std::string_view(index_[mid].last_key) < key) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo == index_.size()) return std::nullopt;
  return lo;
}

DataBlock SstReader::read_block(std::size_t block) const {
  const auto& e = index_.at(block);
  const auto raw = file_.read(e.offset, e.length);
  try {
    auto decoded = decode_data_block(raw);
    if (decoded.records.empty() || decoded.records.back().key != e.last_key) {
      throw DecodeError("block contents disagree with index");
    }
    return decoded;
  } catch (const DecodeError& err) {
    throw CorruptionError(path_.string(), err.what());
  }
}

}  // namespace umjoin::lsm
