// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
//
// PNSL1 field checkpoints: a JSON header next to a little-endian binary
// sidecar holding the row-major node values.
//
//   header  <stem>.json  {"format": "PNSL1", "version": 1, "grid": {...},
//                         "p": .., "n": .., "domain": {...}, "iterations": .., ...}
//   values  <stem>.bin   8 bytes "PNSL1\0\0\0", uint64 count, count float64
#pragma once

#include <filesystem>
#include <string>

#include "pnlab/geometry.hpp"
#include "pnlab/grid_field.hpp"
#include "pnlab/solver.hpp"

namespace pnlab::checkpoint {

inline constexpr char kMagic[8] = {'P', 'N', 'S', 'L', '1', '\0', '\0', '\0'};
inline constexpr int kVersion = 1;

struct Checkpoint {
    GridField field;  // tags are rebuilt from domain and epsilon on load
    geometry::DomainSpec domain;
    operators::PParams params;
    double rhs = 1.0;
    double dirichlet = 0.0;  // constant boundary value
    double epsilon = 0.0;    // classification band width used by the solver
    solver::ConvergenceReport report;
};

/// Sidecar path for a header path: same stem, extension ".bin".
std::filesystem::path sidecar_path(const std::filesystem::path& header);

/// Writes header and sidecar atomically (temp file + rename each).
void write(const std::filesystem::path& header, const Checkpoint& ck);

/// Throws FormatError on bad magic, truncation, size mismatch or a malformed
/// header; pnlab::Error when a file cannot be opened.
Checkpoint read(const std::filesystem::path& header);

/// Binary sidecar encoding, exposed for tests.
std::string encode_values(const std::vector<double>& values);
std::vector<double> decode_values(const std::string& bytes);

}  // namespace pnlab::checkpoint
