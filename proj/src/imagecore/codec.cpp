#include "forgemask/imagecore/codec.hpp"

#include "forgemask/error.hpp"

#include <csetjmp>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <jpeglib.h>
#include <png.h>

namespace forgemask {

namespace {

bool is_png(std::span<const std::uint8_t> b) {
    static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    return b.size() >= 8 && std::memcmp(b.data(), sig, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> b) {
    return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF;
}

ImageBuffer decode_png(std::span<const std::uint8_t> bytes) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw DecodeError("PNG", image.message);
    }
    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const int channels = color ? 3 : 1;
    if (image.width == 0 || image.height == 0) {
        png_image_free(&image);
        throw DecodeError("PNG", "zero-sized image");
    }
    std::vector<std::uint8_t> data(PNG_IMAGE_SIZE(image));
    // Alpha, when present, is composited over black.
    png_color background{0, 0, 0};
    if (!png_image_finish_read(&image, &background, data.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw DecodeError("PNG", msg);
    }
    return ImageBuffer(static_cast<int>(image.width), static_cast<int>(image.height), channels,
                       std::move(data));
}

struct JpegErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

// libjpeg reports truncated or corrupt entropy data as warnings and keeps going.
// Those are promoted to hard errors.
void jpeg_emit_message(j_common_ptr cinfo, int msg_level) {
    if (msg_level < 0) jpeg_error_exit(cinfo);
}

struct JpegDecodeState {
    std::vector<std::uint8_t> data;
    int width = 0;
    int height = 0;
};

// State that must survive a longjmp lives in caller-owned objects.
bool decode_jpeg_into(std::span<const std::uint8_t> bytes, JpegDecodeState& state,
                      JpegErrorManager& jerr) {
    jpeg_decompress_struct cinfo;
    cinfo.err = jpeg_std_error(&jerr.base);
    jerr.base.error_exit = jpeg_error_exit;
    jerr.base.emit_message = jpeg_emit_message;
    jerr.message[0] = '\0';
    if (setjmp(jerr.jump)) {
        jpeg_destroy_decompress(&cinfo);
        return false;
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    state.width = static_cast<int>(cinfo.output_width);
    state.height = static_cast<int>(cinfo.output_height);
    state.data.resize(static_cast<std::size_t>(state.width) * state.height * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row =
            state.data.data() + static_cast<std::size_t>(cinfo.output_scanline) * state.width * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return true;
}

ImageBuffer decode_jpeg(std::span<const std::uint8_t> bytes) {
    JpegDecodeState state;
    JpegErrorManager jerr;
    if (!decode_jpeg_into(bytes, state, jerr)) throw DecodeError("JPEG", jerr.message);
    return ImageBuffer(state.width, state.height, 3, std::move(state.data));
}

struct JpegEncodeState {
    unsigned char* buffer = nullptr;
    unsigned long size = 0;
};

bool encode_jpeg_into(const ImageBuffer& img, int quality, JpegEncodeState& state,
                      JpegErrorManager& jerr) {
    jpeg_compress_struct cinfo;
    cinfo.err = jpeg_std_error(&jerr.base);
    jerr.base.error_exit = jpeg_error_exit;
    jerr.message[0] = '\0';
    if (setjmp(jerr.jump)) {
        jpeg_destroy_compress(&cinfo);
        return false;
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &state.buffer, &state.size);
    cinfo.image_width = static_cast<JDIMENSION>(img.width());
    cinfo.image_height = static_cast<JDIMENSION>(img.height());
    cinfo.input_components = img.channels();
    cinfo.in_color_space = img.channels() == 3 ? JCS_RGB : JCS_GRAYSCALE;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    if (img.channels() == 3) {
        // 4:2:0
        cinfo.comp_info[0].h_samp_factor = 2;
        cinfo.comp_info[0].v_samp_factor = 2;
        cinfo.comp_info[1].h_samp_factor = 1;
        cinfo.comp_info[1].v_samp_factor = 1;
        cinfo.comp_info[2].h_samp_factor = 1;
        cinfo.comp_info[2].v_samp_factor = 1;
    }
    cinfo.dct_method = JDCT_ISLOW;
    jpeg_start_compress(&cinfo, TRUE);
    const std::size_t stride = static_cast<std::size_t>(img.width()) * img.channels();
    while (cinfo.next_scanline < cinfo.image_height) {
        auto* row = const_cast<JSAMPLE*>(img.data().data() + cinfo.next_scanline * stride);
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
    return true;
}

}  // namespace

ImageBuffer decode_image(std::span<const std::uint8_t> bytes) {
    if (is_png(bytes)) return decode_png(bytes);
    if (is_jpeg(bytes)) return decode_jpeg(bytes);
    throw DecodeError("unknown", "stream is neither PNG nor JPEG");
}

std::vector<std::uint8_t> encode_png(const ImageBuffer& img) {
    if (img.empty()) throw ParameterError("cannot encode an empty image");
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, img.data().data(), 0, nullptr)) {
        throw EncodeError(std::string("PNG encode failed: ") + image.message);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, img.data().data(), 0, nullptr)) {
        throw EncodeError(std::string("PNG encode failed: ") + image.message);
    }
    out.resize(size);
    return out;
}

std::vector<std::uint8_t> encode_jpeg(const ImageBuffer& img, int quality) {
    if (quality < 1 || quality > 100) {
        throw ParameterError("JPEG quality must be in [1, 100], got " + std::to_string(quality));
    }
    if (img.empty()) throw ParameterError("cannot encode an empty image");
    JpegEncodeState state;
    JpegErrorManager jerr;
    const bool ok = encode_jpeg_into(img, quality, state, jerr);
    std::vector<std::uint8_t> out;
    if (ok) out.assign(state.buffer, state.buffer + state.size);
    std::free(state.buffer);
    if (!ok) throw EncodeError(std::string("JPEG encode failed: ") + jerr.message);
    return out;
}

ImageBuffer jpeg_reencode(const ImageBuffer& img, int quality) {
    ImageBuffer decoded = decode_image(encode_jpeg(img, quality));
    return img.channels() == 1 ? to_grayscale(decoded) : decoded;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed for " + path.string());
    return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

ImageBuffer load_image(const std::filesystem::path& path) {
    return decode_image(read_file_bytes(path));
}

void save_png(const std::filesystem::path& path, const ImageBuffer& img) {
    write_file_bytes(path, encode_png(img));
}

}  // namespace forgemask
