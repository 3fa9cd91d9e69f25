#include "tdhfc/data_files.hpp"

#include <cstdlib>

#include "tdhfc/errors.hpp"

#ifndef TDHFC_BUNDLED_DATA_DIR
#define TDHFC_BUNDLED_DATA_DIR "data"
#endif

namespace tdhfc {

std::filesystem::path bundled_data_dir() {
  if (const char* env = std::getenv("TDHFC_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return TDHFC_BUNDLED_DATA_DIR;
}

std::filesystem::path resolve_data_file(const std::string& name, const std::filesystem::path& base) {
  namespace fs = std::filesystem;
  const fs::path p(name);
  if (p.is_absolute()) {
    if (fs::exists(p)) return p;
  } else {
    if (!base.empty() && fs::exists(base / p)) return base / p;
    if (base.empty() && fs::exists(p)) return p;
    if (const fs::path d = bundled_data_dir() / p; fs::exists(d)) return d;
  }
  throw Error("data file not found: " + name + " (searched " +
              (base.empty() ? std::string(".") : base.string()) + " and " + bundled_data_dir().string() + ")");
}

}  // namespace tdhfc
