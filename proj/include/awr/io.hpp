#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "awr/grid.hpp"

namespace awr {

/* Field files: one line of JSON metadata terminated by '\n', then the raw
 * payload, little-endian float64, row-major with axis 0 slowest (the grid's
 * flat order), one block per component:
 *   scalar  -> ["f"]
 *   vector  -> ["v0", ..., "v{d-1}"]
 *   tensor0 -> d = 2: ["t00","t01"];  d = 3: ["t00","t11","t01","t02","t12"]
 * Readers validate the header against the expected kind and the payload
 * against the exact byte count; diagnostics carry byte offsets. */
void write_field(const std::string& path, const ScalarField& f);
void write_field(const std::string& path, const VectorField& f);
void write_field(const std::string& path, const SymTensorField0& f);

ScalarField read_scalar_field(const std::string& path);
VectorField read_vector_field(const std::string& path);
SymTensorField0 read_tensor_field(const std::string& path);

/* CSV tables with a fixed numeric format (shortest round-trip float64), LF
 * line endings, so identical values produce identical bytes. */
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
std::vector<std::vector<double>> read_csv(const std::string& path,
                                          std::vector<std::string>* header = nullptr);

// Serializes a double as the shortest decimal that round-trips exactly.
std::string format_double(double x);

/* Exclusive writer lock on a directory: creates <dir>/.lock (failing if it
 * already exists) and removes it on destruction. */
class DirLock {
public:
    explicit DirLock(const std::filesystem::path& dir);
    ~DirLock();
    DirLock(const DirLock&) = delete;
    DirLock& operator=(const DirLock&) = delete;

private:
    std::filesystem::path lock_path_;
};

} // namespace awr
