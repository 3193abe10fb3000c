#pragma once

#include <cstdio>
#include <map>
#include <string>
#include <vector>

namespace gazedec {

// Minimal CSV support for the three-file corpus format: UTF-8, header
// row, comma-separated, decimal point, no quoting.
class CsvTable {
public:
    static CsvTable read_file(const std::string& path);

    bool has_column(const std::string& name) const;
    // Throws MissingColumn naming the file when absent.
    size_t column(const std::string& name) const;

    size_t row_count() const { return rows_.size(); }
    const std::string& cell(size_t row, size_t col) const { return rows_[row][col]; }

    const std::string& str(size_t row, const std::string& col) const;
    double num(size_t row, const std::string& col) const;
    long integer(size_t row, const std::string& col) const;

    const std::string& path() const { return path_; }
    // 1-based data row number for error messages (header is row 1).
    size_t file_row(size_t row) const { return row + 2; }

private:
    std::string path_;
    std::vector<std::string> header_;
    std::map<std::string, size_t> col_index_;
    std::vector<std::vector<std::string>> rows_;
};

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    CsvWriter& field(const std::string& v);
    CsvWriter& field(double v);
    CsvWriter& field(long v);
    CsvWriter& field(int v) { return field(static_cast<long>(v)); }
    CsvWriter& field(size_t v) { return field(static_cast<long>(v)); }
    void end_row();

private:
    FILE* out_ = nullptr;
    std::string path_;
    bool row_started_ = false;
    void sep();
};

// %.17g preserves doubles across a write/parse round trip.
std::string format_double(double v);

} // namespace gazedec
