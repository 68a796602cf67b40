#pragma once

#include <filesystem>
#include <string>

#include "parcon/errors.hpp"
#include "parcon/grid.hpp"
#include "parcon/pde_adjoint.hpp"

namespace parcon {

/// Plain-text exchange format for space-time fields and measures.
///
/// A field file is a header line
///   field <dim> <nodes_x> <nodes_y> <length_x> <length_y> <horizon> <steps>
/// followed by steps+1 lines, one per time level from 0 to steps, each
/// holding the interior nodal values in row-major order. Values are printed
/// with 17 significant digits so doubles round-trip exactly.
///
/// A measure file uses the tag "measure", appends the sign mode
/// (nonnegative|signed) to the header, and carries steps lines of cylinder
/// masses for levels 1..steps followed by one line of terminal masses.
///
/// All writes go through a temporary file in the destination directory that
/// is renamed into place, so readers never observe a partially written file.

struct FieldFile {
  Grids grids;
  GridFunction values;
};

struct MeasureFile {
  Grids grids;
  MeasurePair measure;
};

void write_field(const std::filesystem::path& path, const Grids& grids,
                 const GridFunction& values);
FieldFile read_field(const std::filesystem::path& path);

void write_measure(const std::filesystem::path& path, const Grids& grids,
                   const MeasurePair& measure);
MeasureFile read_measure(const std::filesystem::path& path);

/// Writes `content` to `path` atomically (temp file + rename). Throws IoError
/// if any filesystem step fails.
void write_text_atomic(const std::filesystem::path& path,
                       const std::string& content);

}  // namespace parcon
