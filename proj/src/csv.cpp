#include "gazedec/csv.hpp"

#include "gazedec/errors.hpp"

#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>

namespace gazedec {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

CsvTable CsvTable::read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error(ErrorKind::IoError, "cannot open " + path + ": " + std::strerror(errno));

    CsvTable t;
    t.path_ = path;
    std::string line;
    if (!std::getline(in, line))
        throw data_error(ErrorKind::InvalidValue, path + ": empty file, expected a header row");
    t.header_ = split_line(line);
    for (size_t i = 0; i < t.header_.size(); ++i) t.col_index_[t.header_[i]] = i;

    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != t.header_.size())
            throw data_error(ErrorKind::InvalidValue,
                             path + " row " + std::to_string(lineno) + ": expected " +
                                 std::to_string(t.header_.size()) + " fields, found " +
                                 std::to_string(cells.size()));
        t.rows_.push_back(std::move(cells));
    }
    return t;
}

bool CsvTable::has_column(const std::string& name) const {
    return col_index_.count(name) > 0;
}

size_t CsvTable::column(const std::string& name) const {
    auto it = col_index_.find(name);
    if (it == col_index_.end())
        throw data_error(ErrorKind::MissingColumn, path_ + ": missing column '" + name + "'");
    return it->second;
}

const std::string& CsvTable::str(size_t row, const std::string& col) const {
    return rows_[row][column(col)];
}

double CsvTable::num(size_t row, const std::string& col) const {
    const std::string& s = str(row, col);
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE)
        throw data_error(ErrorKind::InvalidValue,
                         path_ + " row " + std::to_string(file_row(row)) + ": '" + s +
                             "' is not a number in column " + col);
    return v;
}

long CsvTable::integer(size_t row, const std::string& col) const {
    const std::string& s = str(row, col);
    char* end = nullptr;
    errno = 0;
    long v = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE)
        throw data_error(ErrorKind::InvalidValue,
                         path_ + " row " + std::to_string(file_row(row)) + ": '" + s +
                             "' is not an integer in column " + col);
    return v;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : path_(path) {
    out_ = std::fopen(path.c_str(), "wb");
    if (!out_) throw data_error(ErrorKind::IoError, "cannot write " + path + ": " + std::strerror(errno));
    for (size_t i = 0; i < header.size(); ++i) {
        if (i) std::fputc(',', out_);
        std::fputs(header[i].c_str(), out_);
    }
    std::fputc('\n', out_);
}

CsvWriter::~CsvWriter() {
    if (out_) std::fclose(out_);
}

void CsvWriter::sep() {
    if (row_started_) std::fputc(',', out_);
    row_started_ = true;
}

CsvWriter& CsvWriter::field(const std::string& v) {
    sep();
    std::fputs(v.c_str(), out_);
    return *this;
}

CsvWriter& CsvWriter::field(double v) {
    sep();
    std::fputs(format_double(v).c_str(), out_);
    return *this;
}

CsvWriter& CsvWriter::field(long v) {
    sep();
    std::fprintf(out_, "%ld", v);
    return *this;
}

void CsvWriter::end_row() {
    std::fputc('\n', out_);
    row_started_ = false;
}

std::string format_double(double v) {
    char buf[40];
    if (v == static_cast<double>(static_cast<long long>(v)) && std::abs(v) < 1e15) {
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
        return buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // prefer the lowest precision that round-trips
    for (int prec = 1; prec <= 16; ++prec) {
        char cand[40];
        std::snprintf(cand, sizeof(cand), "%.*g", prec, v);
        if (std::strtod(cand, nullptr) == v) return cand;
    }
    return buf;
}

} // namespace gazedec
