#pragma once

#include <vector>

#include "fewrays/image.hpp"

namespace fewrays {

/// Mean squared error over all pixels and channels.
/// Throws std::invalid_argument if the sizes differ.
double mse(const Image& a, const Image& b);

constexpr double kPsnrCap = 99.0;

/// 10 log10(1 / mse) with peak 1.0, capped at kPsnrCap (identical images).
double psnr_from_mse(double mse);
double psnr(const Image& a, const Image& b);

/// Single-scale SSIM on Rec. 601 luma: Gaussian window 11x11, sigma 1.5,
/// K1 = 0.01, K2 = 0.03, dynamic range 1, mean over valid window positions.
/// Images smaller than the window use the largest odd window that fits.
/// The parallel version filters separably; ssim_serial is the reference twin.
double ssim(const Image& a, const Image& b);
double ssim_serial(const Image& a, const Image& b);

/// The normalized 1-D Gaussian taps used by ssim() for a given window size.
std::vector<double> ssim_gaussian(int window, double sigma = 1.5);
int ssim_window(int height, int width);

}  // namespace fewrays
