#include "fieldops/types.hpp"

#include <cmath>
#include <string>

namespace fieldops {

Image Image::filled(int width, int height, double value, int max_value) {
    Image img;
    img.width = width;
    img.height = height;
    img.max_value = max_value;
    img.data.assign(std::size_t(width) * height, value);
    validate(img);
    return img;
}

VectorField VectorField::zeros(int width, int height, int channels) {
    VectorField f;
    f.width = width;
    f.height = height;
    f.channels = channels;
    f.data.assign(std::size_t(width) * height * channels, 0.0);
    validate(f);
    return f;
}

ScalarField ScalarField::zeros(int width, int height) {
    ScalarField f;
    f.width = width;
    f.height = height;
    f.data.assign(std::size_t(width) * height, 0.0);
    validate(f);
    return f;
}

void validate(const Image& img) {
    if (img.width < 1 || img.height < 1)
        throw Error(ErrorKind::Validation, "image: width and height must be >= 1");
    if (img.max_value < 1)
        throw Error(ErrorKind::Validation, "image: max_value must be >= 1");
    if (img.data.size() != img.pixel_count())
        throw Error(ErrorKind::Validation,
                    "image: data length " + std::to_string(img.data.size()) +
                        " != width*height " + std::to_string(img.pixel_count()));
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        double v = img.data[i];
        if (!(v >= 0.0 && v <= double(img.max_value)))
            throw Error(ErrorKind::Validation,
                        "image: value at index " + std::to_string(i) +
                            " outside [0, max_value]");
    }
}

void validate(const VectorField& field) {
    if (field.width < 1 || field.height < 1)
        throw Error(ErrorKind::Validation, "field: width and height must be >= 1");
    if (field.channels != 2 && field.channels != 3)
        throw Error(ErrorKind::Validation, "field: channels must be 2 or 3");
    std::size_t expect = field.pixel_count() * field.channels;
    if (field.data.size() != expect)
        throw Error(ErrorKind::Validation,
                    "field: data length " + std::to_string(field.data.size()) +
                        " != width*height*channels " + std::to_string(expect));
    for (std::size_t i = 0; i < field.data.size(); ++i) {
        if (!std::isfinite(field.data[i]))
            throw Error(ErrorKind::Validation,
                        "field: non-finite component at index " + std::to_string(i));
    }
}

void validate(const ScalarField& field) {
    if (field.width < 1 || field.height < 1)
        throw Error(ErrorKind::Validation, "scalar field: width and height must be >= 1");
    if (field.data.size() != field.pixel_count())
        throw Error(ErrorKind::Validation,
                    "scalar field: data length " + std::to_string(field.data.size()) +
                        " != width*height " + std::to_string(field.pixel_count()));
    for (std::size_t i = 0; i < field.data.size(); ++i) {
        if (!std::isfinite(field.data[i]))
            throw Error(ErrorKind::Validation,
                        "scalar field: non-finite value at index " + std::to_string(i));
    }
}

}  // namespace fieldops
