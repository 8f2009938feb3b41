#include "stefan/csv.hpp"

#include <charconv>
#include <filesystem>
#include <system_error>

#include "stefan/errors.hpp"

namespace stefan {

CsvWriter::CsvWriter(const std::string& path, const std::string& schema,
                     const std::vector<std::string>& columns)
    : path_(path), out_(path), ncols_(columns.size()) {
    if (!out_) throw validation_error("cannot open output file: " + path);
    out_ << "# " << schema << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
        out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != ncols_)
        throw validation_error("csv row width " + std::to_string(values.size()) +
                               " does not match header width " + std::to_string(ncols_) +
                               " in " + path_);
    for (std::size_t i = 0; i < values.size(); ++i)
        out_ << fmt_full(values[i]) << (i + 1 < values.size() ? "," : "\n");
}

void CsvWriter::raw_row(const std::string& line) { out_ << line << "\n"; }

std::string fmt_full(double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    if (ec != std::errc()) return "nan";
    return std::string(buf, p);
}

void ensure_directory(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw validation_error("cannot create directory " + path + ": " + ec.message());
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw validation_error("cannot open output file: " + path);
    out << content;
}

} // namespace stefan
