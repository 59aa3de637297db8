#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "magclimb/dynamics/signal_frame.hpp"

namespace magclimb::dsp {

/// Per-sample Euclidean norm over the named channels (two or three axes).
/// Throws LookupError for unknown channel names.
std::vector<double> magnitude_channel(const SignalFrame& frame, const std::vector<std::string>& axes);

/// Windows of `length` samples starting at 0, stride, 2*stride, ...; the trailing partial
/// window is dropped and an input shorter than `length` gives no windows.
std::vector<std::vector<double>> window_segments(std::span<const double> x, std::size_t length, std::size_t stride);

/// floor((n - length) / stride) + 1, or 0 when n < length.
std::size_t window_count(std::size_t n, std::size_t length, std::size_t stride);

}  // namespace magclimb::dsp
