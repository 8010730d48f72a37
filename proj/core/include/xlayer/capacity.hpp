#ifndef XLAYER_CAPACITY_HPP_
#define XLAYER_CAPACITY_HPP_

namespace xlayer {

// Parameters of a single link's Shannon capacity: gain q, noise spectral
// density N0 (W/MHz) and the logarithm base used to express the rate.
struct LinkChannel {
  double gain = 1.0;
  double noise = 1.0;
  double log_base = 2.0;
};

struct CapacityGradient {
  double d_power = 0.0;      // dc/dp, Mbps per W
  double d_bandwidth = 0.0;  // dc/dw, Mbps per MHz
};

// Signal-to-noise ratio p*q/(w*N0). Requires w > 0.
double snr(double bandwidth, double power, const LinkChannel& link);

// c(w, p) = w * log(1 + p q / (w N0)) in Mbps for w in MHz and p in W.
// The perspective is extended continuously with c(0, p) = 0.
// Throws InvalidArgument on negative inputs.
double capacity(double bandwidth, double power, const LinkChannel& link);
double capacity(double bandwidth, double power, double gain, double noise,
                double log_base = 2.0);

// Gradient of capacity with respect to (p, w); singular at w = 0, which is
// rejected.
CapacityGradient capacity_gradient(double bandwidth, double power, const LinkChannel& link);
CapacityGradient capacity_gradient(double bandwidth, double power, double gain, double noise,
                                   double log_base = 2.0);

// Limit of the gradient as the SNR tends to zero: (q / (N0 ln b), 0).
CapacityGradient capacity_gradient_at_zero_snr(const LinkChannel& link);

}  // namespace xlayer

#endif  // XLAYER_CAPACITY_HPP_
