#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "tnt/dense_tensor.hpp"
#include "tnt/matrices.hpp"
#include "tnt/tensor.hpp"

namespace tnt {

// Container layout: the 5 bytes "TNTZ1", a little-endian uint64 header
// length, a JSON header, then the payload of little-endian doubles (per node:
// core, then factor). The header records the CRC32 of the payload.

using Container = std::variant<TnTensor, TTMatrix, CPMatrix>;

std::string to_bytes(const Container& object);
/// Throws BadMagicError, ChecksumError (also for truncated data) or SizeMismatchError.
Container from_bytes(std::string_view bytes);

void save(const Container& object, const std::filesystem::path& path);
Container load(const std::filesystem::path& path);
/// load() restricted to tensors; other kinds raise FormatError.
TnTensor load_tensor(const std::filesystem::path& path);

/// The JSON header of a container file, verbatim.
std::string read_header(const std::filesystem::path& path);

/// Raw little-endian doubles; the shape is supplied by the caller.
void write_dense(const DenseTensor& x, const std::filesystem::path& path);
/// Throws SizeMismatchError if the file length is not 8 * numel(shape).
DenseTensor read_dense(const std::filesystem::path& path, const Shape& shape);

}  // namespace tnt
