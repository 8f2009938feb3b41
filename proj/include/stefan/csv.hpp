#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace stefan {

// CSV writer with a schema-version comment line. Readers are expected to skip
// '#' lines and ignore trailing columns they do not know.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::string& schema,
              const std::vector<std::string>& columns);
    void row(const std::vector<double>& values);
    void raw_row(const std::string& line);
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ofstream out_;
    std::size_t ncols_;
};

// Formats a double round-trippably (max_digits10).
std::string fmt_full(double v);

void ensure_directory(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace stefan
