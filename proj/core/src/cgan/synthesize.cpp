#include "alforge/cgan/synthesize.hpp"

#include <cstdio>

#include "alforge/core/error.hpp"
#include "alforge/core/raster_io.hpp"
#include "alforge/nn/image_tensor.hpp"

namespace alforge::cgan {

ImageSample synthesize(Generator& g, const ImageSample& source, const Image& conditioning, const Mask& perturbed_mask,
                       const MaskAutoencoder& ae, std::string id) {
  if (!conditioning.same_shape(perturbed_mask) || !conditioning.same_shape(source.pixels))
    throw_error(ErrorCategory::Data, "synthesize: '" + source.id + "' and the perturbed mask differ in shape");
  nn::NoGradGuard guard;
  const nn::Tensor z = encode_masks(ae, {&perturbed_mask});
  const nn::Tensor y = g.forward(nn::image_batch(conditioning), z, false);
  ImageSample out;
  out.id = std::move(id);
  out.pixels = quantize16(nn::tensor_image(y));
  out.mask = perturbed_mask;
  out.label = source.label;
  out.provenance = Provenance::Synthetic;
  out.parent_id = source.id;
  return out;
}

ImageSample synthesize(Generator& g, const ImageSample& source, const Mask& perturbed_mask,
                       const MaskAutoencoder& ae, std::string id) {
  return synthesize(g, source, source.pixels, perturbed_mask, ae, std::move(id));
}

std::vector<ImageSample> synthesize_children(Generator& g, const ImageSample& source,
                                             const std::vector<maskops::Perturbation>& perturbations,
                                             const MaskAutoencoder& ae, const std::string& id_prefix) {
  std::vector<ImageSample> out;
  out.reserve(perturbations.size());
  char suffix[16];
  for (std::size_t j = 0; j < perturbations.size(); ++j) {
    std::snprintf(suffix, sizeof suffix, "-%02zu", j);
    const auto& p = perturbations[j];
    ImageSample child = synthesize(g, source, p.image, p.mask, ae, id_prefix + suffix);
    child.perturbation = p.spec;
    out.push_back(std::move(child));
  }
  return out;
}

}  // namespace alforge::cgan
