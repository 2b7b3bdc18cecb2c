#pragma once

#include <filesystem>
#include <sstream>
#include <string>

#include "rsing/distribution.hpp"
#include "rsing/errors.hpp"

namespace rsing::test {

inline std::filesystem::path source_dir() { return RSING_SOURCE_DIR; }

inline DiscreteLaw law(const std::string& name) { return load_law(source_dir() / "laws" / (name + ".law")); }

inline DiscreteLaw law_from(const std::string& text) {
    std::istringstream in(text);
    return standardize(RawPmf::parse(in));
}

inline RawPmf pmf_from(const std::string& text) {
    std::istringstream in(text);
    return RawPmf::parse(in);
}

}  // namespace rsing::test
