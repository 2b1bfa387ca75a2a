#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "rpslab/common.hpp"

namespace rpslab {

/// Deterministic CSV writer: '.' decimal, '\n' line endings, %.17g floats.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    void row(const std::vector<double>& values);
    void row_mixed(const std::vector<std::string>& cells);
    void close();

private:
    std::ofstream os_;
    std::size_t columns_;
    std::string path_;
};

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);
bool file_exists(const std::string& path);
void ensure_directory(const std::string& path);

}  // namespace rpslab
