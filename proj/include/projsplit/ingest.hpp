#pragma once

#include <string>

#include "projsplit/lasso.hpp"

namespace projsplit {

enum class DataFormat { DenseCsv, MatrixMarket, Synthetic };

struct IngestOptions {
    bool normalize = false;
    // dense CSV: which column holds b (negative = last); ignored when b_path set
    int b_column = -1;
    // separate right-hand-side file (required for MatrixMarket)
    std::string b_path;
};

// Loads Q and b into a lasso skeleton (lambda and partition left for the
// caller). Parse failures carry line/column positions.
LassoProblem ingest(const std::string& path, DataFormat format, const IngestOptions& opts = {});

// All entries of Q and b i.i.d. standard normal from the seed.
LassoProblem synthetic_lasso(std::size_t m, std::size_t d, std::uint64_t seed, bool normalize = false);

// Scales each column to unit Euclidean norm; zero columns are left as-is.
// Returns the number of zero columns.
std::size_t normalize_columns(DenseMatrix& q);

DenseMatrix read_matrix_market(const std::string& path);
void write_matrix_market(const std::string& path, const DenseMatrix& m);

// one value per line
Vec read_vector_file(const std::string& path);

void write_dense_csv(const std::string& path, const DenseMatrix& q, const Vec* b_last_column = nullptr);

}  // namespace projsplit
