#include <stdio.h>
#include <string.h>

#define MAX_SAMPLES 8

/* Split one row of interleaved samples into per-sample lanes and
   checksum them. The lane array is sized for MAX_SAMPLES. */
static int unpack_row(const unsigned char *row, int spp, int width) {
    int lanes[MAX_SAMPLES];
    int total = 0;
    int s;

    memset(lanes, 0, sizeof(lanes));
    for (s = 0; s < spp; s++)
        lanes[s] = row[s] * width;
    for (s = 0; s < spp && s < MAX_SAMPLES; s++)
        total += lanes[s];
    return total;
}

int main(int argc, char **argv) {
    unsigned char header[2];
    unsigned char row[256];
    FILE *fp;
    int spp, width;
    size_t got;

    if (argc < 2) {
        fprintf(stderr, "usage: %s <sample-file>\n", argv[0]);
        return 2;
    }
    fp = fopen(argv[1], "rb");
    if (fp == NULL) {
        perror(argv[1]);
        return 2;
    }
    if (fread(header, 1, sizeof(header), fp) != sizeof(header)) {
        fprintf(stderr, "short header\n");
        fclose(fp);
        return 2;
    }
    spp = header[0];
    width = header[1];
    got = fread(row, 1, sizeof(row), fp);
    fclose(fp);
    if (got < (size_t)spp) {
        fprintf(stderr, "row shorter than %d samples\n", spp);
        return 2;
    }
    printf("checksum %d\n", unpack_row(row, spp, width));
    return 0;
}
