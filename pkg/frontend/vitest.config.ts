import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    // the e2e file owns a server process; keep files serial
    fileParallelism: false,
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
