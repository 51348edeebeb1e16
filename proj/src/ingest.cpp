#include "projsplit/ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "projsplit/kernels.hpp"

namespace projsplit {

namespace {

std::string location(const std::string& path, std::size_t line, std::size_t column) {
    return path + ":" + std::to_string(line) + ":" + std::to_string(column);
}

bool parse_double(std::string_view token, double& out) {
    const char* begin = token.data();
    const char* end = begin + token.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t' || *(end - 1) == '\r')) --end;
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end && begin != end;
}

// Splits a CSV line and parses every field; fields are plain numbers, so no
// quoting is involved on input.
bool parse_csv_row(const std::string& line, std::vector<double>& row, std::size_t& bad_column) {
    row.clear();
    std::size_t start = 0;
    std::size_t col = 1;
    for (;;) {
        std::size_t comma = line.find(',', start);
        std::string_view field(line.data() + start,
                               (comma == std::string::npos ? line.size() : comma) - start);
        double v;
        if (!parse_double(field, v)) {
            bad_column = col;
            return false;
        }
        row.push_back(v);
        if (comma == std::string::npos) break;
        start = comma + 1;
        ++col;
    }
    return true;
}

LassoProblem ingest_dense_csv(const std::string& path, const IngestOptions& opts) {
    std::ifstream in(path);
    if (!in) throw DataError("ingest: cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::vector<double> row;
        std::size_t bad_column = 0;
        if (!parse_csv_row(line, row, bad_column)) {
            if (first_content_line) {  // tolerate a single header line
                first_content_line = false;
                continue;
            }
            throw DataError("ingest: bad number at " + location(path, lineno, bad_column));
        }
        first_content_line = false;
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw DataError("ingest: ragged row at " + location(path, lineno, 1));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("ingest: no data rows in " + path);

    const bool external_b = !opts.b_path.empty();
    const std::size_t width = rows.front().size();
    if (!external_b && width < 2) {
        throw DataError("ingest: need at least two columns when b comes from the matrix file");
    }

    std::size_t b_col = 0;
    if (!external_b) {
        const int c = opts.b_column;
        b_col = c < 0 ? width - 1 : static_cast<std::size_t>(c);
        if (b_col >= width) throw DataError("ingest: b column out of range");
    }

    LassoProblem p;
    const std::size_t d = external_b ? width : width - 1;
    p.q = DenseMatrix(rows.size(), d);
    p.b.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::size_t jq = 0;
        for (std::size_t j = 0; j < width; ++j) {
            if (!external_b && j == b_col) {
                p.b[i] = rows[i][j];
            } else {
                p.q(i, jq++) = rows[i][j];
            }
        }
    }
    if (external_b) p.b = read_vector_file(opts.b_path);
    if (p.b.size() != p.q.rows) {
        throw DataError("ingest: b has " + std::to_string(p.b.size()) + " entries for " +
                        std::to_string(p.q.rows) + " rows");
    }
    return p;
}

}  // namespace

std::size_t normalize_columns(DenseMatrix& q) {
    std::size_t zero_cols = 0;
    for (std::size_t j = 0; j < q.cols; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < q.rows; ++i) s += q(i, j) * q(i, j);
        if (s == 0.0) {
            ++zero_cols;
            continue;
        }
        const double inv = 1.0 / std::sqrt(s);
        for (std::size_t i = 0; i < q.rows; ++i) q(i, j) *= inv;
    }
    return zero_cols;
}

LassoProblem ingest(const std::string& path, DataFormat format, const IngestOptions& opts) {
    if (format == DataFormat::Synthetic) {
        throw ConfigError("ingest: synthetic data comes from synthetic_lasso");
    }
    LassoProblem p;
    if (format == DataFormat::DenseCsv) {
        p = ingest_dense_csv(path, opts);
    } else {
        if (opts.b_path.empty()) {
            throw ConfigError("ingest: MatrixMarket input needs a separate b file");
        }
        p.q = read_matrix_market(path);
        p.b = read_vector_file(opts.b_path);
        if (p.b.size() != p.q.rows) throw DataError("ingest: b length does not match matrix rows");
    }
    if (opts.normalize) normalize_columns(p.q);
    return p;
}

LassoProblem synthetic_lasso(std::size_t m, std::size_t d, std::uint64_t seed, bool normalize) {
    if (m == 0 || d == 0) throw ConfigError("synthetic_lasso: dimensions must be positive");
    SplitMix64 rng(seed);
    LassoProblem p;
    p.q = DenseMatrix(m, d);
    for (double& v : p.q.data) v = rng.normal();
    p.b.resize(m);
    for (double& v : p.b) v = rng.normal();
    if (normalize) normalize_columns(p.q);
    return p;
}

DenseMatrix read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("read_matrix_market: cannot open " + path);

    std::string header;
    if (!std::getline(in, header) || header.rfind("%%MatrixMarket", 0) != 0) {
        throw DataError("read_matrix_market: missing banner in " + path);
    }
    std::istringstream hs(header);
    std::string tag, object, fmt, field, symmetry;
    hs >> tag >> object >> fmt >> field >> symmetry;
    if (object != "matrix" || (fmt != "coordinate" && fmt != "array") || field != "real" ||
        symmetry != "general") {
        throw DataError("read_matrix_market: only real general coordinate/array matrices supported");
    }

    std::string line;
    std::size_t lineno = 1;
    do {
        if (!std::getline(in, line)) throw DataError("read_matrix_market: missing size line");
        ++lineno;
    } while (!line.empty() && line[0] == '%');

    std::istringstream ss(line);
    std::size_t rows = 0, cols = 0, nnz = 0;
    if (fmt == "coordinate") {
        if (!(ss >> rows >> cols >> nnz)) {
            throw DataError("read_matrix_market: bad size line at " + location(path, lineno, 1));
        }
        DenseMatrix m(rows, cols);
        for (std::size_t e = 0; e < nnz; ++e) {
            std::size_t i, j;
            double v;
            if (!(in >> i >> j >> v)) {
                throw DataError("read_matrix_market: bad entry " + std::to_string(e + 1) + " in " + path);
            }
            if (i < 1 || i > rows || j < 1 || j > cols) {
                throw DataError("read_matrix_market: entry out of bounds in " + path);
            }
            m(i - 1, j - 1) = v;
        }
        return m;
    }
    if (!(ss >> rows >> cols)) {
        throw DataError("read_matrix_market: bad size line at " + location(path, lineno, 1));
    }
    DenseMatrix m(rows, cols);
    for (std::size_t j = 0; j < cols; ++j) {  // array format is column-major
        for (std::size_t i = 0; i < rows; ++i) {
            double v;
            if (!(in >> v)) throw DataError("read_matrix_market: truncated array data in " + path);
            m(i, j) = v;
        }
    }
    return m;
}

void write_matrix_market(const std::string& path, const DenseMatrix& m) {
    std::ofstream out(path);
    if (!out) throw DataError("write_matrix_market: cannot open " + path);
    std::size_t nnz = 0;
    for (double v : m.data) nnz += v != 0.0;
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.rows << " " << m.cols << " " << nnz << "\n";
    char buf[64];
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            const double v = m(i, j);
            if (v == 0.0) continue;
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
            out << (i + 1) << " " << (j + 1) << " ";
            out.write(buf, ptr - buf);
            out << "\n";
        }
    }
}

Vec read_vector_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("read_vector_file: cannot open " + path);
    Vec v;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        double x;
        if (!parse_double(line, x)) {
            throw DataError("read_vector_file: bad number at " + location(path, lineno, 1));
        }
        v.push_back(x);
    }
    return v;
}

void write_dense_csv(const std::string& path, const DenseMatrix& q, const Vec* b_last_column) {
    std::ofstream out(path);
    if (!out) throw DataError("write_dense_csv: cannot open " + path);
    char buf[64];
    auto put = [&](double v) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        out.write(buf, ptr - buf);
    };
    for (std::size_t i = 0; i < q.rows; ++i) {
        for (std::size_t j = 0; j < q.cols; ++j) {
            if (j > 0) out << ",";
            put(q(i, j));
        }
        if (b_last_column) {
            out << ",";
            put((*b_last_column)[i]);
        }
        out << "\n";
    }
}

}  // namespace projsplit
