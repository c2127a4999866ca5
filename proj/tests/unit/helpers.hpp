#pragma once

#include "qcaan/core.hpp"

#include <filesystem>
#include <fstream>
#include <string>

namespace testing {

inline std::filesystem::path temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / ("qcaan_test_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream(path) << text;
    return path.string();
}

inline qcaan::Matrix random_matrix(qcaan::Rng& rng, long rows, long cols, double lo = 0.0, double hi = 1.0) {
    qcaan::Matrix m(rows, cols);
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j) m(i, j) = lo + (hi - lo) * qcaan::uniform01(rng);
    return m;
}

}  // namespace testing
