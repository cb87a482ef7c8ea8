"""LSB branch watermark for image classification APIs."""
