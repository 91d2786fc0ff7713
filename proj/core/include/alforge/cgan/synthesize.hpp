#pragma once

#include <string>
#include <vector>

#include "alforge/cgan/autoencoder.hpp"
#include "alforge/cgan/generator.hpp"
#include "alforge/core/sample.hpp"
#include "alforge/maskops/perturb.hpp"

namespace alforge::cgan {

/// Runs G on (conditioning, encode(perturbed_mask)) in inference mode. The
/// child is synthetic, inherits the source label, names the source as its
/// parent and carries `perturbed_mask`. Pixels are 16-bit quantized.
ImageSample synthesize(Generator& g, const ImageSample& source, const Image& conditioning, const Mask& perturbed_mask,
                       const MaskAutoencoder& ae, std::string id);
/// Conditions on the source pixels.
ImageSample synthesize(Generator& g, const ImageSample& source, const Mask& perturbed_mask,
                       const MaskAutoencoder& ae, std::string id);

/// One child per perturbation, ids `<prefix>-00`, `<prefix>-01`, ...; each
/// child records its perturbation spec.
std::vector<ImageSample> synthesize_children(Generator& g, const ImageSample& source,
                                             const std::vector<maskops::Perturbation>& perturbations,
                                             const MaskAutoencoder& ae, const std::string& id_prefix);

}  // namespace alforge::cgan
