#include "fpcsa/sketch.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <string>

#include "fpcsa/errors.hpp"

namespace fpcsa {

namespace {

constexpr char kMagic[6] = {'F', 'P', 'C', 'S', 'A', '\0'};
constexpr uint16_t kVersion = 1;
constexpr size_t kHeaderSize = 42;

constexpr std::array<uint32_t, 256> kCrcTable = [] {
  std::array<uint32_t, 256> table{};
  for (uint32_t i = 0; i < 256; ++i) {
    uint32_t c = i;
    for (int j = 0; j < 8; ++j) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    table[i] = c;
  }
  return table;
}();

uint32_t crc32(const uint8_t* data, size_t size) {
  uint32_t c = 0xFFFFFFFFu;
  for (size_t i = 0; i < size; ++i) c = kCrcTable[(c ^ data[i]) & 0xFF] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

void append_le(std::vector<uint8_t>& out, uint64_t value, unsigned bytes) {
  for (unsigned i = 0; i < bytes; ++i) out.push_back(uint8_t(value >> (8 * i)));
}

uint64_t read_le(const uint8_t* data, unsigned bytes) {
  uint64_t value = 0;
  for (unsigned i = 0; i < bytes; ++i) value |= uint64_t(data[i]) << (8 * i);
  return value;
}

size_t packed_bytes(uint32_t rows, uint32_t columns, unsigned bits) {
  return (size_t(rows) * columns * bits + 7) / 8;
}

}  // namespace

Sketch::Sketch(const FieldSpec& spec, uint32_t rows, uint32_t columns,
               uint64_t seed)
    : spec_(spec),
      plan_(seed, rows >= 1 ? rows : 1, columns),
      cell_bits_(spec.cell_bits()),
      cell_mask_((uint64_t{1} << spec.cell_bits()) - 1) {
  if (rows < 3)
    throw ConfigError("sketch rows must be at least 3, got " +
                      std::to_string(rows));
  words_.assign((size_t(rows) * columns * cell_bits_ + 63) / 64, 0);
}

uint64_t Sketch::get_cell(size_t index) const {
  size_t bit = index * cell_bits_;
  size_t word = bit >> 6;
  unsigned shift = unsigned(bit & 63);
  uint64_t value = words_[word] >> shift;
  if (shift + cell_bits_ > 64) value |= words_[word + 1] << (64 - shift);
  return value & cell_mask_;
}

void Sketch::set_cell(size_t index, uint64_t value) {
  size_t bit = index * cell_bits_;
  size_t word = bit >> 6;
  unsigned shift = unsigned(bit & 63);
  words_[word] = (words_[word] & ~(cell_mask_ << shift)) | (value << shift);
  if (shift + cell_bits_ > 64) {
    unsigned consumed = 64 - shift;
    words_[word + 1] =
        (words_[word + 1] & ~(cell_mask_ >> consumed)) | (value >> consumed);
  }
}

void Sketch::update(uint64_t element, FieldElement k) {
  CellAssignment where = plan_.assign(spec_, element);
  FieldElement increment = spec_.mul(k, where.g_value);
  if (increment.value == 0) return;
  size_t index = size_t(where.row) * plan_.columns() + where.level;
  FieldElement current{get_cell(index)};
  set_cell(index, spec_.add(current, increment).value);
}

FieldElement Sketch::cell(uint32_t row, uint32_t level) const {
  if (row >= plan_.rows() || level >= plan_.columns())
    throw UsageError("cell index out of range");
  return FieldElement{get_cell(size_t(row) * plan_.columns() + level)};
}

HighestPositions Sketch::highest_positions() const {
  HighestPositions result;
  uint32_t columns = plan_.columns();
  result.w.reserve(plan_.rows());
  for (uint32_t i = 0; i < plan_.rows(); ++i) {
    int highest = -1;
    size_t base = size_t(i) * columns;
    for (int j = int(columns) - 1; j >= 0; --j) {
      if (get_cell(base + j) != 0) {
        highest = j;
        break;
      }
    }
    if (highest < 0) ++result.empty_rows;
    result.w.push_back(highest + plan_.offsets()[i]);
  }
  return result;
}

Estimate Sketch::estimate(const EstimatorConstants& constants) const {
  if (constants.m != plan_.rows() || constants.field_order != spec_.order())
    throw UsageError("constants were computed for a different sketch shape: (" +
                     std::to_string(constants.m) + ", " +
                     std::to_string(constants.field_order) + ") vs (" +
                     std::to_string(plan_.rows()) + ", " +
                     std::to_string(spec_.order()) + ")");
  HighestPositions positions = highest_positions();
  if (positions.empty_rows == plan_.rows()) return {0.0, false};
  double sum = 0;
  for (double w : positions.w) sum += w;
  double value = constants.norm_factor * std::exp2(sum / plan_.rows());
  return {value, positions.empty_rows == 0};
}

std::vector<uint8_t> Sketch::serialize() const {
  size_t table_bytes = packed_bytes(plan_.rows(), plan_.columns(), cell_bits_);
  std::vector<uint8_t> out;
  out.reserve(kHeaderSize + table_bytes + 4);
  out.insert(out.end(), kMagic, kMagic + 6);
  append_le(out, kVersion, 2);
  append_le(out, spec_.characteristic(), 8);
  append_le(out, spec_.degree(), 2);
  append_le(out, spec_.degree() > 1 ? spec_.reduction_poly() : 0, 8);
  append_le(out, plan_.rows(), 4);
  append_le(out, plan_.columns(), 4);
  append_le(out, plan_.seed(), 8);
  for (size_t i = 0; i < table_bytes; ++i)
    out.push_back(uint8_t(words_[i >> 3] >> ((i & 7) * 8)));
  append_le(out, crc32(out.data(), out.size()), 4);
  return out;
}

Sketch Sketch::deserialize(const uint8_t* data, size_t size) {
  auto need = [&](size_t offset, size_t count) {
    if (size < offset + count)
      throw FormatError("truncated sketch data", size);
  };
  need(0, kHeaderSize);
  if (std::memcmp(data, kMagic, 6) != 0)
    throw FormatError("bad magic", 0);
  if (read_le(data + 6, 2) != kVersion)
    throw FormatError("unsupported version " +
                          std::to_string(read_le(data + 6, 2)),
                      6);
  uint64_t characteristic = read_le(data + 8, 8);
  auto degree = uint16_t(read_le(data + 16, 2));
  uint64_t poly = read_le(data + 18, 8);
  FieldSpec spec = FieldSpec::prime_field(2);
  try {
    if (degree == 1) {
      if (poly != 0)
        throw FormatError("reduction polynomial given for a prime field", 18);
      spec = FieldSpec::prime_field(characteristic);
    } else {
      if (characteristic != 2)
        throw FormatError("extension fields require characteristic 2", 8);
      spec = FieldSpec::binary_field(degree, poly);
    }
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& error) {
    throw FormatError(std::string("invalid field parameters: ") + error.what(),
                      8);
  }
  auto rows = uint32_t(read_le(data + 26, 4));
  auto columns = uint32_t(read_le(data + 30, 4));
  uint64_t seed = read_le(data + 34, 8);
  if (rows < 3) throw FormatError("sketch rows must be at least 3", 26);
  if (columns < 1 || columns > 64)
    throw FormatError("sketch columns must be in [1, 64]", 30);

  Sketch sketch(spec, rows, columns, seed);
  size_t table_bytes = packed_bytes(rows, columns, sketch.cell_bits_);
  need(kHeaderSize, table_bytes + 4);
  for (size_t i = 0; i < table_bytes; ++i)
    sketch.words_[i >> 3] |= uint64_t(data[kHeaderSize + i]) << ((i & 7) * 8);

  uint32_t stored = uint32_t(read_le(data + kHeaderSize + table_bytes, 4));
  uint32_t computed = crc32(data, kHeaderSize + table_bytes);
  if (stored != computed)
    throw FormatError("checksum mismatch", kHeaderSize + table_bytes);

  size_t cells = size_t(rows) * columns;
  size_t used_bits = cells * sketch.cell_bits_;
  if (used_bits & 63) {
    uint64_t pad = sketch.words_.back() >> (used_bits & 63);
    if (pad != 0)
      throw FormatError("nonzero padding bits after the cell table",
                        kHeaderSize + table_bytes - 1);
  }
  for (size_t i = 0; i < cells; ++i) {
    if (sketch.get_cell(i) >= spec.order())
      throw FormatError("cell value outside the field",
                        kHeaderSize + i * sketch.cell_bits_ / 8);
  }
  return sketch;
}

Sketch Sketch::deserialize(const std::vector<uint8_t>& bytes) {
  return deserialize(bytes.data(), bytes.size());
}

bool Sketch::operator==(const Sketch& other) const {
  return spec_ == other.spec_ && plan_.seed() == other.plan_.seed() &&
         plan_.rows() == other.plan_.rows() &&
         plan_.columns() == other.plan_.columns() && words_ == other.words_;
}

Sketch merge(const Sketch& a, const Sketch& b) {
  if (!(a.spec_ == b.spec_))
    throw UsageError("cannot merge: fields differ (" + a.spec_.to_string() +
                     " vs " + b.spec_.to_string() + ")");
  if (a.rows() != b.rows())
    throw UsageError("cannot merge: row counts differ (" +
                     std::to_string(a.rows()) + " vs " +
                     std::to_string(b.rows()) + ")");
  if (a.columns() != b.columns())
    throw UsageError("cannot merge: column counts differ (" +
                     std::to_string(a.columns()) + " vs " +
                     std::to_string(b.columns()) + ")");
  if (a.seed() != b.seed())
    throw UsageError("cannot merge: seeds differ");
  Sketch out = a;
  if (a.spec_.characteristic() == 2) {
    for (size_t i = 0; i < out.words_.size(); ++i) out.words_[i] ^= b.words_[i];
  } else {
    size_t cells = size_t(a.rows()) * a.columns();
    for (size_t i = 0; i < cells; ++i) {
      FieldElement sum =
          a.spec_.add(FieldElement{a.get_cell(i)}, FieldElement{b.get_cell(i)});
      out.set_cell(i, sum.value);
    }
  }
  return out;
}

}  // namespace fpcsa
