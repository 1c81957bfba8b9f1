// SPDX-License-Identifier: Apache-2.0

#ifndef TRIBEAM_FIELD3_HPP
#define TRIBEAM_FIELD3_HPP

#include <cassert>
#include <cstddef>
#include <vector>

namespace tribeam {

/// Dense 3D array with x as the fastest-varying index. Every staggered field
/// component is stored at the full (nx, ny, nz) node extent so that all
/// components share one indexing scheme; the valid sub-range per component is
/// the caller's business.
template <typename T>
class Field3 {
public:
    Field3() = default;
    Field3(int nx, int ny, int nz, T fill = T{})
        : nx_(nx), ny_(ny), nz_(nz),
          data_(static_cast<std::size_t>(nx) * ny * nz, fill) {}

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nz() const { return nz_; }
    std::size_t size() const { return data_.size(); }

    std::size_t index(int i, int j, int k) const {
        assert(i >= 0 && i < nx_ && j >= 0 && j < ny_ && k >= 0 && k < nz_);
        return (static_cast<std::size_t>(k) * ny_ + j) * nx_ + i;
    }

    T& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
    const T& operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    void fill(T v) { data_.assign(data_.size(), v); }

    auto begin() { return data_.begin(); }
    auto end() { return data_.end(); }
    auto begin() const { return data_.begin(); }
    auto end() const { return data_.end(); }

    bool same_shape(const Field3& o) const {
        return nx_ == o.nx_ && ny_ == o.ny_ && nz_ == o.nz_;
    }

private:
    int nx_ = 0, ny_ = 0, nz_ = 0;
    std::vector<T> data_;
};

/// Field3 with one ghost layer on every face, indexed from -1 to n+1 per
/// axis. The Yee update sweeps then run over full component ranges with
/// boundary conditions materialized into the ghost slots beforehand.
template <typename T>
class GhostField3 {
public:
    GhostField3() = default;
    GhostField3(int nx, int ny, int nz)
        : nx_(nx), ny_(ny), nz_(nz), gx_(nx + 3), gy_(ny + 3), gz_(nz + 3),
          data_(static_cast<std::size_t>(gx_) * gy_ * gz_, T{}) {}

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nz() const { return nz_; }
    std::size_t stride_j() const { return gx_; }
    std::size_t stride_k() const { return static_cast<std::size_t>(gx_) * gy_; }

    std::size_t index(int i, int j, int k) const {
        assert(i >= -1 && i <= nx_ + 1 && j >= -1 && j <= ny_ + 1 && k >= -1 && k <= nz_ + 1);
        return (static_cast<std::size_t>(k + 1) * gy_ + (j + 1)) * gx_ + (i + 1);
    }

    T& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
    const T& operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::size_t storage_size() const { return data_.size(); }

    void fill(T v) { data_.assign(data_.size(), v); }

private:
    int nx_ = 0, ny_ = 0, nz_ = 0;
    int gx_ = 0, gy_ = 0, gz_ = 0;
    std::vector<T> data_;
};

} // namespace tribeam

#endif
