#pragma once

#include <filesystem>
#include <string>

namespace tdhfc {

/// Directory holding the bundled interchange files. The TDHFC_DATA_DIR
/// environment variable takes precedence over the compiled-in location.
std::filesystem::path bundled_data_dir();

/// Resolves `name` as given (absolute or relative to `base`), then inside
/// bundled_data_dir(). Throws Error when nothing matches.
std::filesystem::path resolve_data_file(const std::string& name, const std::filesystem::path& base = {});

}  // namespace tdhfc
