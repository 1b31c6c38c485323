#include <stdio.h>

/* Pixel budget for one frame: width x height, four channels. */
static int frame_area(int width, int height) {
    int area = width * height;

    return area * 4;
}

int main(int argc, char **argv) {
    int width, height;
    FILE *fp;

    if (argc < 2) {
        fprintf(stderr, "usage: %s <frame-file>\n", argv[0]);
        return 2;
    }
    fp = fopen(argv[1], "r");
    if (fp == NULL) {
        perror(argv[1]);
        return 2;
    }
    if (fscanf(fp, "%d %d", &width, &height) != 2) {
        fprintf(stderr, "bad frame size\n");
        fclose(fp);
        return 2;
    }
    fclose(fp);
    if (width < 0 || height < 0) {
        fprintf(stderr, "negative frame size\n");
        return 2;
    }
    printf("budget %d\n", frame_area(width, height));
    return 0;
}
