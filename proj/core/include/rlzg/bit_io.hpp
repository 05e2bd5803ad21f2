#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rlzg/error.hpp"

namespace rlzg {

// MSB-first bit writer appending to a byte vector.
class BitWriter {
 public:
  explicit BitWriter(std::vector<std::uint8_t>& out) : out_(&out) {}

  // Appends the low `count` bits of `bits` (count <= 32), most significant first.
  void write(std::uint32_t bits, int count) {
    acc_ = (acc_ << count) | (bits & ((std::uint64_t{1} << count) - 1));
    pending_ += count;
    bits_written_ += static_cast<std::uint64_t>(count);
    while (pending_ >= 8) {
      pending_ -= 8;
      out_->push_back(static_cast<std::uint8_t>(acc_ >> pending_));
    }
  }

  // Pads the current byte with zero bits.
  void flush_to_byte_boundary() {
    if (pending_ > 0) {
      out_->push_back(static_cast<std::uint8_t>(acc_ << (8 - pending_)));
      pending_ = 0;
    }
    acc_ = 0;
  }

  bool byte_aligned() const noexcept { return pending_ == 0; }
  std::uint64_t bits_written() const noexcept { return bits_written_; }
  std::size_t byte_size() const noexcept { return out_->size() + (pending_ > 0 ? 1 : 0); }

 private:
  std::vector<std::uint8_t>* out_;
  std::uint64_t acc_ = 0;
  int pending_ = 0;
  std::uint64_t bits_written_ = 0;
};

// MSB-first bit reader over a borrowed byte span. Reading past the end throws
// a corrupt-archive error; peeking past the end yields zero bits.
class BitReader {
 public:
  BitReader() = default;
  explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t peek(int count) {
    refill();
    return static_cast<std::uint32_t>(buf_ >> (64 - count));
  }

  void consume(int count) {
    if (count > avail_) corrupt("bit stream truncated");
    buf_ <<= count;
    avail_ -= count;
  }

  std::uint32_t read(int count) {
    const std::uint32_t v = peek(count);
    consume(count);
    return v;
  }

  // Number of distinct payload bytes pulled into the reader so far.
  std::size_t bytes_touched() const noexcept { return pos_; }
  std::uint64_t bits_remaining() const noexcept {
    return static_cast<std::uint64_t>(bytes_.size() - pos_) * 8 + static_cast<std::uint64_t>(avail_);
  }

 private:
  void refill() {
    while (avail_ <= 56 && pos_ < bytes_.size()) {
      buf_ |= static_cast<std::uint64_t>(bytes_[pos_++]) << (56 - avail_);
      avail_ += 8;
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::uint64_t buf_ = 0;
  int avail_ = 0;
};

}  // namespace rlzg
