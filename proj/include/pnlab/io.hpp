// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace pnlab::io {

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place, so readers never observe a partially written file.
void write_atomic(const std::filesystem::path& path, std::string_view bytes);

/// Whole-file read; throws pnlab::Error when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

}  // namespace pnlab::io
