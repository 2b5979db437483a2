#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hsisr/error.hpp"

namespace hsisr {

/// Dense rank-3 array stored channel-major: (channel, row, col).
///
/// Used for spectral cubes, RGB images and network feature maps alike.
template <typename T>
class Tensor3 {
public:
    using value_type = T;

    Tensor3() = default;

    Tensor3(int channels, int rows, int cols, T fill = T{})
        : channels_(channels), rows_(rows), cols_(cols) {
        if (channels < 0 || rows < 0 || cols < 0) {
            throw ShapeError("negative tensor extent");
        }
        data_.assign(static_cast<std::size_t>(channels) * rows * cols, fill);
    }

    Tensor3(int channels, int rows, int cols, std::vector<T> values)
        : channels_(channels), rows_(rows), cols_(cols), data_(std::move(values)) {
        if (channels < 0 || rows < 0 || cols < 0) {
            throw ShapeError("negative tensor extent");
        }
        if (data_.size() != static_cast<std::size_t>(channels) * rows * cols) {
            throw ShapeError("value count does not match tensor shape");
        }
    }

    int channels() const noexcept { return channels_; }
    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    std::size_t plane_size() const noexcept { return static_cast<std::size_t>(rows_) * cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(int c, int r, int col) noexcept {
        return data_[(static_cast<std::size_t>(c) * rows_ + r) * cols_ + col];
    }
    const T& operator()(int c, int r, int col) const noexcept {
        return data_[(static_cast<std::size_t>(c) * rows_ + r) * cols_ + col];
    }

    std::span<T> channel(int c) noexcept {
        return {data_.data() + static_cast<std::size_t>(c) * plane_size(), plane_size()};
    }
    std::span<const T> channel(int c) const noexcept {
        return {data_.data() + static_cast<std::size_t>(c) * plane_size(), plane_size()};
    }

    T* data() noexcept { return data_.data(); }
    const T* data() const noexcept { return data_.data(); }
    std::vector<T>& values() noexcept { return data_; }
    const std::vector<T>& values() const noexcept { return data_; }

    bool same_shape(const Tensor3& other) const noexcept {
        return channels_ == other.channels_ && rows_ == other.rows_ && cols_ == other.cols_;
    }

    std::string shape_string() const {
        return std::to_string(channels_) + "x" + std::to_string(rows_) + "x" + std::to_string(cols_);
    }

    void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

    template <typename U>
    Tensor3<U> cast() const {
        Tensor3<U> out(channels_, rows_, cols_);
        std::transform(data_.begin(), data_.end(), out.data(), [](T v) { return static_cast<U>(v); });
        return out;
    }

    /// Copy of channels [first, first + count).
    Tensor3 slice_channels(int first, int count) const {
        if (first < 0 || count < 0 || first + count > channels_) {
            throw ShapeError("channel slice out of range");
        }
        Tensor3 out(count, rows_, cols_);
        std::copy_n(data_.data() + static_cast<std::size_t>(first) * plane_size(),
                    static_cast<std::size_t>(count) * plane_size(), out.data());
        return out;
    }

    /// Copy of the spatial window [row, row + height) x [col, col + width).
    Tensor3 crop(int row, int col, int height, int width) const {
        if (row < 0 || col < 0 || height < 0 || width < 0 || row + height > rows_ ||
            col + width > cols_) {
            throw ShapeError("crop window outside tensor");
        }
        Tensor3 out(channels_, height, width);
        for (int c = 0; c < channels_; ++c) {
            for (int r = 0; r < height; ++r) {
                std::copy_n(&(*this)(c, row + r, col), width, &out(c, r, 0));
            }
        }
        return out;
    }

    Tensor3& operator+=(const Tensor3& other) {
        require_same_shape(other, "tensor +=");
        for (std::size_t i = 0; i < data_.size(); ++i) {
            data_[i] += other.data_[i];
        }
        return *this;
    }

    Tensor3& operator*=(T scale) {
        for (auto& v : data_) {
            v *= scale;
        }
        return *this;
    }

    void require_same_shape(const Tensor3& other, const char* what) const {
        if (!same_shape(other)) {
            throw ShapeError(std::string(what) + ": shape " + shape_string() + " vs " +
                             other.shape_string());
        }
    }

    friend bool operator==(const Tensor3& a, const Tensor3& b) {
        return a.same_shape(b) && a.data_ == b.data_;
    }

private:
    int channels_ = 0;
    int rows_ = 0;
    int cols_ = 0;
    std::vector<T> data_;
};

}  // namespace hsisr
